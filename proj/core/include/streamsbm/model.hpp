#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamsbm {

/// Rate floor applied to every rate-like parameter after a gradient step.
inline constexpr double kDefaultRateFloor = 1e-6;

enum class ModelKind { HomPoisson, InhomPoisson, HomHawkes, InhomHawkes };

[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
/// Parses "hom-poisson", "inhom-poisson", "hom-hawkes", "inhom-hawkes".
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);
[[nodiscard]] constexpr bool is_hawkes(ModelKind kind) noexcept {
    return kind == ModelKind::HomHawkes || kind == ModelKind::InhomHawkes;
}
[[nodiscard]] constexpr bool is_inhomogeneous(ModelKind kind) noexcept {
    return kind == ModelKind::InhomPoisson || kind == ModelKind::InhomHawkes;
}

/// Periodic step functions: f_h(t) = 1{ floor(t / period) mod H == h }, h = 0..H-1.
/// With H == 1 the single function is the constant 1.
class BasisFamily {
public:
    BasisFamily() = default;
    BasisFamily(std::size_t count, double period);

    [[nodiscard]] std::size_t size() const noexcept { return count_; }
    [[nodiscard]] double period() const noexcept { return period_; }

    /// Index of the single active step function at t.
    [[nodiscard]] std::size_t active(double t) const noexcept;
    [[nodiscard]] double value(std::size_t h, double t) const noexcept { return active(t) == h ? 1.0 : 0.0; }
    /// Measure of {u in [t0, t1] : f_h(u) = 1}.
    [[nodiscard]] double mass(std::size_t h, double t0, double t1) const noexcept;

private:
    [[nodiscard]] double cumulative(std::size_t h, double t) const noexcept;

    std::size_t count_{1};
    double period_{1.0};
};

/// Parameters of one of the four block intensity families.
///
/// The baseline is stored uniformly as H coefficient matrices (K x K):
///   hom-poisson   : H = 1, baseline[0] = B
///   inhom-poisson : baseline[h] = a(h)
///   hom-hawkes    : H = 1, baseline[0] = mu, plus excitation b and decay
///   inhom-hawkes  : baseline[h] = a(h), plus excitation b and decay
/// The excitation kernel is f(s) = decay * exp(-decay * s), which integrates to 1.
struct ModelParams {
    ModelKind kind{ModelKind::HomPoisson};
    std::vector<Eigen::MatrixXd> baseline;
    BasisFamily basis;
    Eigen::MatrixXd excitation;
    double decay{0.0};

    static ModelParams hom_poisson(Eigen::MatrixXd rates);
    static ModelParams inhom_poisson(std::vector<Eigen::MatrixXd> coefficients, BasisFamily basis);
    static ModelParams hom_hawkes(Eigen::MatrixXd mu, Eigen::MatrixXd excitation, double decay);
    static ModelParams inhom_hawkes(std::vector<Eigen::MatrixXd> coefficients, BasisFamily basis,
                                    Eigen::MatrixXd excitation, double decay);

    [[nodiscard]] std::size_t num_classes() const noexcept {
        return baseline.empty() ? 0 : static_cast<std::size_t>(baseline.front().rows());
    }
    [[nodiscard]] std::size_t num_basis() const noexcept { return baseline.size(); }
    [[nodiscard]] bool hawkes() const noexcept { return is_hawkes(kind); }

    [[nodiscard]] double baseline_at(std::size_t k, std::size_t l, double t) const;
    [[nodiscard]] double baseline_mass(std::size_t k, std::size_t l, double t0, double t1) const;
    /// Time-averaged baseline matrix: sum_h a(h) / H.
    [[nodiscard]] Eigen::MatrixXd mean_baseline() const;

    /// Throws InputError on shape mismatch, negative or non-finite entries, or decay <= 0.
    void validate() const;
    /// Throws NumericError when any excitation entry is >= 1.
    void require_stationary() const;

    /// Flat parameter vector: baseline[h](k,l) row-major by h, k, l; then excitation(k,l); then decay.
    [[nodiscard]] std::size_t num_values() const noexcept;
    [[nodiscard]] Eigen::VectorXd values() const;
    void set_values(const Eigen::VectorXd& values);
    [[nodiscard]] std::size_t baseline_index(std::size_t h, std::size_t k, std::size_t l) const noexcept;
    [[nodiscard]] std::size_t excitation_index(std::size_t k, std::size_t l) const noexcept;
    [[nodiscard]] std::size_t decay_index() const noexcept;

    /// Clamps every rate to >= floor and every excitation entry to [floor, max_excitation].
    void project(double floor, double max_excitation);

    /// Copy with class k renamed to map[k]; map must be a permutation of 0..K-1.
    [[nodiscard]] ModelParams relabeled(std::span<const int> map) const;
};

/// Conditional intensity lambda_kl(t) given the pair's history. Only points strictly before t
/// excite (a point at t does not count toward its own intensity). Throws NumericError for a
/// nonpositive decay or a history point after t.
[[nodiscard]] double intensity(const ModelParams& params, std::size_t k, std::size_t l, double t,
                               std::span<const double> history);

/// Integral of the unit kernel fired at s over [start, end] (s <= end):
/// exp(-decay (max(start, s) - s)) - exp(-decay (end - s)).
[[nodiscard]] double kernel_mass(double s, double start, double end, double decay) noexcept;

}  // namespace streamsbm
