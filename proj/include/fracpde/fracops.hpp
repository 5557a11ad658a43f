#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracpde {

inline constexpr const char* kArtifactVersion = "0.1.0";

/** Fractional order of the time derivative, restricted to (0, 1). */
struct FracParams {
    double alpha = 0.5;

    /// Throws std::invalid_argument unless 0 < alpha < 1.
    void validate() const;
};

/// Gamma function. Thin wrapper so the call site is greppable; accuracy is
/// guarded by tabulated spot values in the test suite.
double gamma_fn(double x);

/**
 * Time mesh on [0, horizon]: nodes[0] = 0, strictly increasing,
 * nodes[last] = horizon.
 *
 * Power-law grading clusters nodes at t = 0 where fractional solutions
 * have a weak singularity: t_k = horizon * (k/K)^grading. grading = 1 is
 * the uniform mesh.
 */
class TimeGrid {
public:
    static TimeGrid uniform(double horizon, std::size_t intervals);
    static TimeGrid graded(double horizon, std::size_t intervals, double grading);
    static TimeGrid from_nodes(std::vector<double> nodes);

    /// Grading exponent that resolves the t^alpha initial layer of order-alpha
    /// problems on this mesh family.
    static double layer_resolving_grading(double alpha) { return (2.0 - alpha) / alpha; }

    std::size_t intervals() const { return nodes_.size() - 1; }
    std::size_t node_count() const { return nodes_.size(); }
    double node(std::size_t k) const { return nodes_[k]; }
    double dt(std::size_t k) const { return nodes_[k] - nodes_[k - 1]; }
    const std::vector<double>& nodes() const { return nodes_; }
    double horizon() const { return nodes_.back(); }
    double grading_exponent() const { return grading_; }

    bool operator==(const TimeGrid& other) const = default;

private:
    TimeGrid(std::vector<double> nodes, double grading);

    std::vector<double> nodes_;
    double grading_ = 1.0;
};

/**
 * Node-form weights of the discrete Caputo derivative (L1 scheme, i.e.
 * the exact Caputo derivative of the piecewise-linear interpolant):
 *
 *     D^alpha u(t_k) ~= sum_{j=0..k} w(k,j) u_j,   k = 1..K.
 *
 * Rows are obtained by differencing the slope coefficients, so every row
 * sums to zero exactly in floating point and constants are annihilated.
 * Rows are materialized into a triangular table up to table_cap intervals;
 * beyond that they are generated on demand (the table grows as K^2).
 */
class L1Weights {
public:
    L1Weights(const TimeGrid& grid, FracParams params, std::size_t table_cap = 3000);

    double alpha() const { return alpha_; }
    const TimeGrid& grid() const { return grid_; }
    bool materialized() const { return !table_.empty(); }

    /// Fills out[0..k] with the node weights for step k (1 <= k <= K).
    void row(std::size_t k, std::span<double> out) const;

private:
    TimeGrid grid_;
    double alpha_;
    std::vector<double> table_;    // rows 1..K, row k holds k+1 entries
    std::vector<std::size_t> row_offset_;
};

/// Fills the product-trapezoidal coefficients of the order-alpha fractional
/// integral: (I^alpha f)(t_k) ~= sum_{j=0..k} out[j] f(t_j), exact for the
/// piecewise-linear interpolant of f. out.size() >= k+1.
void rl_weights_row(const TimeGrid& grid, FracParams params, std::size_t k,
                    std::span<double> out);

/**
 * Discrete Caputo derivative of the sampled function at nodes t_1..t_K.
 * The value at t_0 is not defined by the scheme and is excluded; the
 * returned vector has size K with element i corresponding to t_{i+1}.
 */
std::vector<double> caputo_apply(std::span<const double> samples, const TimeGrid& grid,
                                 FracParams params);
std::vector<double> caputo_apply(std::span<const double> samples, const L1Weights& weights);

/**
 * Product-trapezoidal approximation of the order-alpha Riemann-Liouville
 * integral at every node. Returned vector has size K+1; element 0 is 0.
 */
std::vector<double> rl_integral_apply(std::span<const double> samples, const TimeGrid& grid,
                                      FracParams params);

/**
 * Max-norm defect of the quadratic-kernel identity
 *
 *   2 z D^alpha z = D^alpha(z^2) + g_{1-alpha}(t) z^2
 *                   + (alpha/Gamma(1-alpha)) int_0^t s^{-alpha-1} [z(t-s)-z(t)]^2 ds
 *
 * for z = u - u(0), with both derivatives taken by the L1 scheme and the
 * memory integral evaluated exactly for the squared piecewise-linear
 * interpolant of z. The residual then measures the interpolation gap of
 * the squared samples and vanishes under refinement for smooth u.
 */
double fundamental_identity_residual(std::span<const double> samples, const TimeGrid& grid,
                                     FracParams params);

}  // namespace fracpde
