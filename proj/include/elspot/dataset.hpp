#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elspot/network.hpp"

namespace elspot {

// Price -> log-price mapping. The offset keeps the argument positive down to
// the market floor price (default floor -1000 $/MWh, offset 1001).
struct TransformSpec {
  double floor_offset = 1001.0;

  double to_log(double price) const;
  double from_log(double logprice) const;
};

// Covariate normalization bounds, frozen from the training window and stored
// with fitted models. Values outside the range may map outside [0,1].
struct NormBounds {
  double lo = 0.0;
  double hi = 1.0;

  double normalize(double x) const;
  double denormalize(double u) const { return lo + u * (hi - lo); }
  double width() const { return hi - lo; }
};

NormBounds bounds_of(const std::vector<double>& training_values);
std::vector<double> normalize_covariate(const std::vector<double>& x, const NormBounds& b);

struct IngestOptions {
  // Lenient mode zeroes the smaller flow of a violating pair instead of
  // erroring; real feeds contain simultaneous nonzero pairs from netting.
  bool lenient_complementarity = false;
  double floor_price = -1000.0;
  double floor_offset = 1001.0;
};

// Aligned half-hourly (or other fixed-step) panel. Immutable after ingestion.
class PanelDataset {
 public:
  std::vector<std::int64_t> timestamps;
  int period_minutes = 30;
  // [region][t] / [arc][t]
  std::vector<std::vector<double>> price;
  std::vector<std::vector<double>> load;
  std::vector<std::vector<double>> flow;
  std::vector<std::vector<double>> loss_adj;
  std::vector<std::vector<double>> supply;     // derived via the flow identity
  std::vector<std::vector<double>> log_price;  // derived via TransformSpec
  TransformSpec transform;

  std::size_t T() const { return timestamps.size(); }
  int index_of_time(std::int64_t t) const;  // -1 when absent

  // Recomputes supply/log_price and checks every invariant; throws on failure.
  void finalize(const MarketNetwork& net, const IngestOptions& opts = {});
};

// supply[i][t] = load + exports - imports + loss adjustment.
std::vector<double> build_supply(const PanelDataset& data, const MarketNetwork& net,
                                 int region);

// Contiguous row slice [begin, end) of an already-finalized dataset.
PanelDataset slice_dataset(const PanelDataset& data, int begin, int end);

struct CsvPaths {
  std::string prices, loads, flows, losses;  // losses may be empty (all-zero)
};

PanelDataset ingest_csv(const CsvPaths& paths, const MarketNetwork& net,
                        const IngestOptions& opts = {});
void write_dataset_csv(const PanelDataset& data, const MarketNetwork& net,
                       const std::string& dir);

}  // namespace elspot
