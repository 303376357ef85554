#pragma once

#include <json.hpp>
#include <string>

#include "vfkit/quadrature.hpp"
#include "vfkit/systems.hpp"
#include "vfkit/types.hpp"

namespace vfkit {

// ---- JSON ----
// Complex numbers are encoded as {"re": x, "im": y}.

nlohmann::json to_json(const Complex& z);
Complex complex_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const PoleResidueModel& model);
PoleResidueModel model_from_json(const nlohmann::json& j);

nlohmann::json ss_to_json(const StateSpaceModel& ss);
StateSpaceModel ss_from_json(const nlohmann::json& j);

nlohmann::json grid_to_json(const QuadGrid& grid);
QuadGrid grid_from_json(const nlohmann::json& j);

nlohmann::json samples_to_json(const SampleSet& samples);
SampleSet samples_from_json(const nlohmann::json& j);

// ---- CSV ----
// Sample CSV: header s_re,s_im,h_re,h_im[,hp_re,hp_im][,sigma].
// Grid CSV: header s_re,s_im,weight; the scale L is recovered from the
// leading node when reading.

std::string samples_to_csv(const SampleSet& samples);
SampleSet samples_from_csv(const std::string& text,
                           std::optional<Complex> m_plus = std::nullopt);

std::string grid_to_csv(const QuadGrid& grid);
QuadGrid grid_from_csv(const std::string& text);

// ---- files & formatting ----

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// 17 significant digits; round-trips doubles exactly.
std::string fmt17(double v);

}  // namespace vfkit
