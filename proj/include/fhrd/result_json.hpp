#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "fhrd/estimation.hpp"
#include "fhrd/prediction.hpp"
#include "fhrd/simulation.hpp"
#include "fhrd/uncertainty.hpp"

namespace fhrd {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json fit_to_json(const FitResult& fit);
nlohmann::json predictions_to_json(const PredictionSet& set);
nlohmann::json mse_to_json(const MseReport& report);
nlohmann::json experiment_to_json(const ExperimentResult& result);
nlohmann::json meta_json(std::optional<std::uint64_t> seed, int replicates);

// One row per cell; numbers printed with %.17g so re-runs are byte-comparable.
std::string experiment_to_csv(const ExperimentResult& result);

// Writes to the path, or to stdout when path is empty.
void write_output(const std::string& path, const std::string& contents);

}  // namespace fhrd
