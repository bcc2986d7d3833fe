#include "streamsbm/model.hpp"

#include "streamsbm/types.hpp"

#include <algorithm>
#include <cmath>

namespace streamsbm {

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::HomPoisson: return "hom-poisson";
        case ModelKind::InhomPoisson: return "inhom-poisson";
        case ModelKind::HomHawkes: return "hom-hawkes";
        case ModelKind::InhomHawkes: return "inhom-hawkes";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "hom-poisson") return ModelKind::HomPoisson;
    if (text == "inhom-poisson") return ModelKind::InhomPoisson;
    if (text == "hom-hawkes") return ModelKind::HomHawkes;
    if (text == "inhom-hawkes") return ModelKind::InhomHawkes;
    throw InputError("unknown model '" + std::string(text) +
                     "' (expected hom-poisson, inhom-poisson, hom-hawkes or inhom-hawkes)");
}

BasisFamily::BasisFamily(std::size_t count, double period) : count_(count), period_(period) {
    if (count_ < 1) {
        throw InputError("basis family needs at least one function");
    }
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        throw InputError("basis period must be positive and finite");
    }
}

std::size_t BasisFamily::active(double t) const noexcept {
    if (count_ == 1) {
        return 0;
    }
    const double bin = std::floor(t / period_);
    const double h = bin - std::floor(bin / static_cast<double>(count_)) * static_cast<double>(count_);
    return std::min(static_cast<std::size_t>(h), count_ - 1);
}

double BasisFamily::cumulative(std::size_t h, double t) const noexcept {
    // Measure of {u in [0, t] : f_h(u) = 1}.
    const double c = t / period_;
    const double cycles = std::floor(c / static_cast<double>(count_));
    const double remainder = c - cycles * static_cast<double>(count_);
    const double partial = std::clamp(remainder - static_cast<double>(h), 0.0, 1.0);
    return period_ * (cycles + partial);
}

double BasisFamily::mass(std::size_t h, double t0, double t1) const noexcept {
    if (t1 <= t0) {
        return 0.0;
    }
    if (count_ == 1) {
        return t1 - t0;
    }
    return cumulative(h, t1) - cumulative(h, t0);
}

namespace {

void require_square(const Eigen::MatrixXd& m, Eigen::Index k, const char* label) {
    if (m.rows() != k || m.cols() != k) {
        throw InputError(std::string(label) + " must be " + std::to_string(k) + "x" + std::to_string(k));
    }
}

void require_finite_nonnegative(const Eigen::MatrixXd& m, const char* label) {
    if (!m.allFinite() || (m.array() < 0.0).any()) {
        throw InputError(std::string(label) + " entries must be finite and nonnegative");
    }
}

}  // namespace

ModelParams ModelParams::hom_poisson(Eigen::MatrixXd rates) {
    ModelParams p;
    p.kind = ModelKind::HomPoisson;
    p.baseline.push_back(std::move(rates));
    p.validate();
    return p;
}

ModelParams ModelParams::inhom_poisson(std::vector<Eigen::MatrixXd> coefficients, BasisFamily basis) {
    ModelParams p;
    p.kind = ModelKind::InhomPoisson;
    p.baseline = std::move(coefficients);
    p.basis = basis;
    p.validate();
    return p;
}

ModelParams ModelParams::hom_hawkes(Eigen::MatrixXd mu, Eigen::MatrixXd excitation, double decay) {
    ModelParams p;
    p.kind = ModelKind::HomHawkes;
    p.baseline.push_back(std::move(mu));
    p.excitation = std::move(excitation);
    p.decay = decay;
    p.validate();
    return p;
}

ModelParams ModelParams::inhom_hawkes(std::vector<Eigen::MatrixXd> coefficients, BasisFamily basis,
                                      Eigen::MatrixXd excitation, double decay) {
    ModelParams p;
    p.kind = ModelKind::InhomHawkes;
    p.baseline = std::move(coefficients);
    p.basis = basis;
    p.excitation = std::move(excitation);
    p.decay = decay;
    p.validate();
    return p;
}

double ModelParams::baseline_at(std::size_t k, std::size_t l, double t) const {
    const std::size_t h = baseline.size() == 1 ? 0 : basis.active(t);
    return baseline[h](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
}

double ModelParams::baseline_mass(std::size_t k, std::size_t l, double t0, double t1) const {
    if (baseline.size() == 1) {
        return baseline[0](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * std::max(0.0, t1 - t0);
    }
    double total = 0.0;
    for (std::size_t h = 0; h < baseline.size(); ++h) {
        total += baseline[h](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * basis.mass(h, t0, t1);
    }
    return total;
}

Eigen::MatrixXd ModelParams::mean_baseline() const {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes()),
                                                 static_cast<Eigen::Index>(num_classes()));
    for (const auto& a : baseline) {
        mean += a;
    }
    return mean / static_cast<double>(baseline.size());
}

void ModelParams::validate() const {
    if (baseline.empty()) {
        throw InputError("model parameters need at least one baseline matrix");
    }
    const Eigen::Index k = baseline.front().rows();
    if (k < 1) {
        throw InputError("model parameters need K >= 1");
    }
    if (!is_inhomogeneous(kind) && baseline.size() != 1) {
        throw InputError("homogeneous models take exactly one baseline matrix");
    }
    if (is_inhomogeneous(kind) && baseline.size() != basis.size()) {
        throw InputError("inhomogeneous models need one coefficient matrix per basis function");
    }
    for (const auto& a : baseline) {
        require_square(a, k, "baseline");
        require_finite_nonnegative(a, "baseline");
    }
    if (is_hawkes(kind)) {
        require_square(excitation, k, "excitation");
        require_finite_nonnegative(excitation, "excitation");
        if (!(decay > 0.0) || !std::isfinite(decay)) {
            throw InputError("Hawkes decay must be positive and finite");
        }
    }
}

void ModelParams::require_stationary() const {
    if (!hawkes()) {
        return;
    }
    if ((excitation.array() >= 1.0).any()) {
        throw NumericError("Hawkes excitation b_kl >= 1 is not stationary (max b = " +
                           std::to_string(excitation.maxCoeff()) + ")");
    }
}

std::size_t ModelParams::num_values() const noexcept {
    const std::size_t k = num_classes();
    return baseline.size() * k * k + (hawkes() ? k * k + 1 : 0);
}

std::size_t ModelParams::baseline_index(std::size_t h, std::size_t k, std::size_t l) const noexcept {
    const std::size_t kk = num_classes();
    return (h * kk + k) * kk + l;
}

std::size_t ModelParams::excitation_index(std::size_t k, std::size_t l) const noexcept {
    const std::size_t kk = num_classes();
    return baseline.size() * kk * kk + k * kk + l;
}

std::size_t ModelParams::decay_index() const noexcept {
    const std::size_t kk = num_classes();
    return baseline.size() * kk * kk + kk * kk;
}

Eigen::VectorXd ModelParams::values() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(num_values()));
    const std::size_t kk = num_classes();
    for (std::size_t h = 0; h < baseline.size(); ++h) {
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                v(static_cast<Eigen::Index>(baseline_index(h, k, l))) =
                    baseline[h](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            }
        }
    }
    if (hawkes()) {
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                v(static_cast<Eigen::Index>(excitation_index(k, l))) =
                    excitation(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            }
        }
        v(static_cast<Eigen::Index>(decay_index())) = decay;
    }
    return v;
}

void ModelParams::set_values(const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != num_values()) {
        throw InputError("parameter vector has the wrong length");
    }
    const std::size_t kk = num_classes();
    for (std::size_t h = 0; h < baseline.size(); ++h) {
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                baseline[h](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                    v(static_cast<Eigen::Index>(baseline_index(h, k, l)));
            }
        }
    }
    if (hawkes()) {
        for (std::size_t k = 0; k < kk; ++k) {
            for (std::size_t l = 0; l < kk; ++l) {
                excitation(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) =
                    v(static_cast<Eigen::Index>(excitation_index(k, l)));
            }
        }
        decay = v(static_cast<Eigen::Index>(decay_index()));
    }
}

ModelParams ModelParams::relabeled(std::span<const int> map) const {
    const std::size_t kk = num_classes();
    std::vector<bool> seen(kk, false);
    if (map.size() != kk) {
        throw InputError("class map length differs from K");
    }
    for (const int c : map) {
        if (c < 0 || static_cast<std::size_t>(c) >= kk || seen[static_cast<std::size_t>(c)]) {
            throw InputError("class map is not a permutation");
        }
        seen[static_cast<std::size_t>(c)] = true;
    }
    ModelParams out = *this;
    for (std::size_t k = 0; k < kk; ++k) {
        for (std::size_t l = 0; l < kk; ++l) {
            const auto nk = static_cast<Eigen::Index>(map[k]);
            const auto nl = static_cast<Eigen::Index>(map[l]);
            const auto ok = static_cast<Eigen::Index>(k);
            const auto ol = static_cast<Eigen::Index>(l);
            for (std::size_t h = 0; h < baseline.size(); ++h) {
                out.baseline[h](nk, nl) = baseline[h](ok, ol);
            }
            if (hawkes()) {
                out.excitation(nk, nl) = excitation(ok, ol);
            }
        }
    }
    return out;
}

void ModelParams::project(double floor, double max_excitation) {
    for (auto& a : baseline) {
        a = a.cwiseMax(floor);
    }
    if (hawkes()) {
        excitation = excitation.cwiseMax(floor).cwiseMin(max_excitation);
        decay = std::max(decay, floor);
    }
}

double intensity(const ModelParams& params, std::size_t k, std::size_t l, double t,
                 std::span<const double> history) {
    if (t < 0.0) {
        throw NumericError("intensity evaluated at negative time");
    }
    const double base = params.baseline_at(k, l, t);
    if (!params.hawkes()) {
        return base;
    }
    if (!(params.decay > 0.0)) {
        throw NumericError("Hawkes decay must be positive");
    }
    double impact = 0.0;
    for (const double s : history) {
        if (s > t) {
            throw NumericError("history point lies after the evaluation time");
        }
        if (s < t) {
            impact += params.decay * std::exp(-params.decay * (t - s));
        }
    }
    return base + params.excitation(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * impact;
}

double kernel_mass(double s, double start, double end, double decay) noexcept {
    const double from = std::max(start, s);
    if (end <= from) {
        return 0.0;
    }
    return std::exp(-decay * (from - s)) - std::exp(-decay * (end - s));
}

}  // namespace streamsbm
