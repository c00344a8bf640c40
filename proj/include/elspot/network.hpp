#pragma once

#include <string>
#include <vector>

#include "elspot/toml.hpp"

namespace elspot {

struct Arc {
  std::string id;
  int origin = -1;       // region index
  int destination = -1;
  double nominal_capacity = 0.0;   // MWh per period
  double observed_max = 0.0;       // tighter empirical bound used by the optimizer
};

// Two directed arcs sharing one physical interconnector; at most one of the
// two flows may be positive at any time.
struct ArcPair {
  int forward = -1;  // arc index
  int reverse = -1;
};

class MarketNetwork {
 public:
  MarketNetwork() = default;
  MarketNetwork(std::vector<std::string> regions, std::vector<Arc> arcs,
                std::vector<ArcPair> pairs);

  static MarketNetwork from_toml(const toml::Table& root);
  static MarketNetwork from_file(const std::string& path);

  int n_regions() const { return static_cast<int>(regions_.size()); }
  int n_arcs() const { return static_cast<int>(arcs_.size()); }
  const std::vector<std::string>& regions() const { return regions_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<ArcPair>& arc_pairs() const { return pairs_; }

  int region_index(const std::string& name) const;  // throws on unknown id
  int arc_index(const std::string& id) const;

  // Arcs with the given origin/destination region.
  const std::vector<int>& arcs_out(int region) const { return out_[region]; }
  const std::vector<int>& arcs_in(int region) const { return in_[region]; }

  // E_{i,j}: arcs from region i to region j (possibly empty).
  std::vector<int> arcs_between(int origin, int destination) const;

 private:
  void index();
  std::vector<std::string> regions_;
  std::vector<Arc> arcs_;
  std::vector<ArcPair> pairs_;
  std::vector<std::vector<int>> out_, in_;
};

}  // namespace elspot
