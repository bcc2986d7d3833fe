#include "json_io.hpp"

#include <fstream>
#include <iostream>

namespace streamsbm::cli {

using Index = Eigen::Index;

json to_json(const Eigen::MatrixXd& matrix) {
    json rows = json::array();
    for (Index r = 0; r < matrix.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < matrix.cols(); ++c) {
            row.push_back(matrix(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array()) {
        throw InputError("expected a matrix as an array of rows");
    }
    const auto rows = static_cast<Index>(j.size());
    const auto cols = rows == 0 ? Index{0} : static_cast<Index>(j.front().size());
    Eigen::MatrixXd out(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw InputError("matrix rows differ in length");
        }
        for (Index c = 0; c < cols; ++c) {
            out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return out;
}

json to_json(const ModelParams& params) {
    json j;
    j["model"] = std::string(to_string(params.kind));
    json baseline = json::array();
    for (const auto& a : params.baseline) {
        baseline.push_back(to_json(a));
    }
    j["baseline"] = std::move(baseline);
    j["basis"] = {{"count", params.basis.size()}, {"period", params.basis.period()}};
    if (params.hawkes()) {
        j["excitation"] = to_json(params.excitation);
        j["decay"] = params.decay;
    }
    return j;
}

ModelParams params_from_json(const json& j) {
    try {
        const ModelKind kind = parse_model_kind(j.at("model").get<std::string>());
        std::vector<Eigen::MatrixXd> baseline;
        for (const auto& a : j.at("baseline")) {
            baseline.push_back(matrix_from_json(a));
        }
        const json& basis = j.at("basis");
        const BasisFamily family(basis.at("count").get<std::size_t>(), basis.at("period").get<double>());
        switch (kind) {
            case ModelKind::HomPoisson:
                return ModelParams::hom_poisson(baseline.at(0));
            case ModelKind::InhomPoisson:
                return ModelParams::inhom_poisson(std::move(baseline), family);
            case ModelKind::HomHawkes:
                return ModelParams::hom_hawkes(baseline.at(0), matrix_from_json(j.at("excitation")),
                                               j.at("decay").get<double>());
            case ModelKind::InhomHawkes:
                return ModelParams::inhom_hawkes(std::move(baseline), family, matrix_from_json(j.at("excitation")),
                                                 j.at("decay").get<double>());
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed parameters: ") + e.what());
    } catch (const std::out_of_range&) {
        throw InputError("malformed parameters: empty baseline");
    }
    throw InputError("unknown model kind");
}

json to_json(const FitOutput& fit) {
    json j;
    j["model"] = std::string(to_string(fit.params.kind));
    j["params"] = to_json(fit.params);
    j["pi"] = fit.pi;
    j["tau"] = to_json(fit.tau);
    j["z_hat"] = fit.z_hat;
    j["config"] = fit.config;
    return j;
}

FitOutput fit_from_json(const json& j) {
    FitOutput out;
    try {
        out.params = params_from_json(j.at("params"));
        out.pi = j.at("pi").get<std::vector<double>>();
        out.tau = matrix_from_json(j.at("tau"));
        out.z_hat = j.at("z_hat").get<std::vector<int>>();
        out.config = j.value("config", json::object());
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed fit output: ") + e.what());
    }
    if (out.pi.size() != out.params.num_classes() ||
        out.tau.cols() != static_cast<Index>(out.params.num_classes()) ||
        out.z_hat.size() != static_cast<std::size_t>(out.tau.rows())) {
        throw InputError("fit output shapes disagree");
    }
    return out;
}

json to_json(const TruthRecord& truth) {
    json j;
    j["model"] = std::string(to_string(truth.params.kind));
    j["params"] = to_json(truth.params);
    j["pi"] = truth.pi;
    j["classes"] = truth.classes;
    j["dense_nodes"] = truth.dense_nodes;
    j["horizon"] = truth.horizon;
    j["num_nodes"] = truth.num_nodes;
    j["seed"] = truth.seed;
    return j;
}

TruthRecord truth_from_json(const json& j) {
    TruthRecord out;
    try {
        out.params = params_from_json(j.at("params"));
        out.pi = j.at("pi").get<std::vector<double>>();
        out.classes = j.at("classes").get<std::vector<int>>();
        out.dense_nodes = j.value("dense_nodes", std::vector<NodeId>{});
        out.horizon = j.at("horizon").get<double>();
        out.num_nodes = j.at("num_nodes").get<NodeId>();
        out.seed = j.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed ground truth: ") + e.what());
    }
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const json& j) {
    if (path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

}  // namespace streamsbm::cli
