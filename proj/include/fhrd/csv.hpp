#pragma once

#include <string>
#include <vector>

#include "fhrd/prediction.hpp"
#include "fhrd/types.hpp"

namespace fhrd {

struct Dataset {
  std::vector<AreaRecord> records;
  std::size_t p = 0;
};

// Header: area_id,y,v,n,z1[,z2,...]; z1 must be 1, v > 0, n >= 1, no missing
// fields. Throws ValidationError with the offending line number.
Dataset load_dataset_csv(const std::string& path);

// Header: area_id,w. Every dataset area must appear exactly once; the raw
// weights must sum to 1 within 1e-9 and are then normalized exactly.
BenchmarkWeights load_weights_csv(const std::string& path, const Dataset& dataset);

}  // namespace fhrd
