#pragma once

#include "streamsbm/model.hpp"
#include "streamsbm/types.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace streamsbm::cli {

using nlohmann::json;

[[nodiscard]] json to_json(const Eigen::MatrixXd& matrix);
[[nodiscard]] Eigen::MatrixXd matrix_from_json(const json& j);

/// {"model", "baseline": H x K x K, "basis": {"count", "period"}, "excitation", "decay"};
/// Poisson families omit excitation and decay.
[[nodiscard]] json to_json(const ModelParams& params);
[[nodiscard]] ModelParams params_from_json(const json& j);

/// Fit output: {model, params, pi, tau, z_hat, config}.
struct FitOutput {
    ModelParams params;
    std::vector<double> pi;
    Eigen::MatrixXd tau;
    std::vector<int> z_hat;
    json config = json::object();
};
[[nodiscard]] json to_json(const FitOutput& fit);
[[nodiscard]] FitOutput fit_from_json(const json& j);

/// Ground truth of a simulation: {model, params, pi, classes, dense_nodes, horizon, num_nodes, seed}.
struct TruthRecord {
    ModelParams params;
    std::vector<double> pi;
    std::vector<int> classes;
    std::vector<NodeId> dense_nodes;
    double horizon{0.0};
    NodeId num_nodes{0};
    std::uint64_t seed{0};
};
[[nodiscard]] json to_json(const TruthRecord& truth);
[[nodiscard]] TruthRecord truth_from_json(const json& j);

/// Parses a JSON file; malformed content raises InputError.
[[nodiscard]] json read_json_file(const std::string& path);
/// Writes `j` indented by two spaces with a trailing newline ("-" writes to stdout).
void write_json_file(const std::string& path, const json& j);

}  // namespace streamsbm::cli
