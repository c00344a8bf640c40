#include "elspot/network.hpp"

#include <set>

#include "elspot/errors.hpp"

namespace elspot {

MarketNetwork::MarketNetwork(std::vector<std::string> regions, std::vector<Arc> arcs,
                             std::vector<ArcPair> pairs)
    : regions_(std::move(regions)), arcs_(std::move(arcs)), pairs_(std::move(pairs)) {
  index();
}

void MarketNetwork::index() {
  if (regions_.empty()) throw ValidationError("network: no regions");
  std::set<std::string> seen(regions_.begin(), regions_.end());
  if (seen.size() != regions_.size())
    throw ValidationError("network: duplicate region names");

  out_.assign(regions_.size(), {});
  in_.assign(regions_.size(), {});
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    const Arc& arc = arcs_[a];
    if (arc.origin < 0 || arc.origin >= n_regions() || arc.destination < 0 ||
        arc.destination >= n_regions())
      throw ValidationError("network: arc '" + arc.id + "' references unknown region");
    if (arc.origin == arc.destination)
      throw ValidationError("network: arc '" + arc.id + "' has origin == destination");
    if (!(arc.nominal_capacity > 0.0) || !(arc.observed_max > 0.0))
      throw ValidationError("network: arc '" + arc.id + "' needs positive capacities");
    out_[arc.origin].push_back(static_cast<int>(a));
    in_[arc.destination].push_back(static_cast<int>(a));
  }

  std::vector<int> pair_count(arcs_.size(), 0);
  for (const auto& p : pairs_) {
    if (p.forward < 0 || p.forward >= n_arcs() || p.reverse < 0 || p.reverse >= n_arcs())
      throw ValidationError("network: arc pair references unknown arc");
    if (p.forward == p.reverse)
      throw ValidationError("network: arc pair must join two distinct arcs");
    if (arcs_[p.forward].origin != arcs_[p.reverse].destination ||
        arcs_[p.forward].destination != arcs_[p.reverse].origin)
      throw ValidationError("network: pair (" + arcs_[p.forward].id + "," +
                            arcs_[p.reverse].id + ") is not a reversed O/D match");
    ++pair_count[p.forward];
    ++pair_count[p.reverse];
  }
  for (std::size_t a = 0; a < arcs_.size(); ++a)
    if (pair_count[a] != 1)
      throw ValidationError("network: arc '" + arcs_[a].id +
                            "' must appear in exactly one pair");
}

int MarketNetwork::region_index(const std::string& name) const {
  for (int i = 0; i < n_regions(); ++i)
    if (regions_[i] == name) return i;
  throw ValidationError("unknown region id: '" + name + "'");
}

int MarketNetwork::arc_index(const std::string& id) const {
  for (int a = 0; a < n_arcs(); ++a)
    if (arcs_[a].id == id) return a;
  throw ValidationError("unknown arc id: '" + id + "'");
}

std::vector<int> MarketNetwork::arcs_between(int origin, int destination) const {
  std::vector<int> out;
  for (int a : out_[origin])
    if (arcs_[a].destination == destination) out.push_back(a);
  return out;
}

MarketNetwork MarketNetwork::from_toml(const toml::Table& root) {
  std::vector<std::string> regions = root.get_string_array("regions");
  std::vector<Arc> arcs;
  std::vector<ArcPair> pairs;

  auto region_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < regions.size(); ++i)
      if (regions[i] == name) return static_cast<int>(i);
    throw ValidationError("network config: unknown region '" + name + "'");
  };

  auto it = root.table_arrays.find("arc");
  if (it == root.table_arrays.end())
    throw ValidationError("network config: no [[arc]] entries");
  for (const auto& t : it->second) {
    Arc a;
    a.id = t.get_string("id");
    a.origin = region_of(t.get_string("from"));
    a.destination = region_of(t.get_string("to"));
    a.nominal_capacity = t.get_number("nominal_capacity");
    a.observed_max = t.get_number_or("observed_max", a.nominal_capacity);
    arcs.push_back(a);
  }

  auto arc_of = [&](const std::string& id) {
    for (std::size_t a = 0; a < arcs.size(); ++a)
      if (arcs[a].id == id) return static_cast<int>(a);
    throw ValidationError("network config: unknown arc '" + id + "'");
  };

  auto pit = root.table_arrays.find("pair");
  if (pit != root.table_arrays.end()) {
    for (const auto& t : pit->second)
      pairs.push_back({arc_of(t.get_string("forward")), arc_of(t.get_string("reverse"))});
  }
  return MarketNetwork(std::move(regions), std::move(arcs), std::move(pairs));
}

MarketNetwork MarketNetwork::from_file(const std::string& path) {
  return from_toml(toml::parse_file(path));
}

}  // namespace elspot
