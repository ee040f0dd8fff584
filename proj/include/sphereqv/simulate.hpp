#pragma once

// Exact-in-law sampling of f_l, the truncated field f and the two-time
// sphere-valued fBm along the meridian grid.
//
// Two routes are available:
//  * harmonic: 2l+1 real coefficients per degree against the real harmonic
//    basis on the meridian; one RNG stream per (seed, replication, l).
//  * circle: the field restricted to a great circle is stationary with
//    covariance sum_j W_j cos(j phi), W_j >= 0, obtained from the expansion
//    P_l(cos phi) = sum_k a_k a_{l-k} cos((l-2k) phi), a_k = binom(2k,k)/4^k.
//    On the grid theta_i = i pi/(2N) the frequencies fold modulo 4N, leaving
//    2N+1 channels. One RNG stream per (seed, replication).
// Both routes reproduce the grid covariance exactly.

#include "sphereqv/covariance.hpp"
#include "sphereqv/rng.hpp"

#include <cstdint>
#include <vector>

namespace sphereqv {

enum class SamplingRoute { automatic, harmonic, circle };

struct PathSample {
    std::vector<double> values;  ///< field at theta_1 .. theta_{N+1}
};

struct FbmPathPair {
    PathSample at_t;
    PathSample at_s;
};

/// Channel used by the circle route when deriving its stream.
inline constexpr std::uint64_t kCircleChannel = ~std::uint64_t{0};

/// 2l+1 real coefficients with variance c each, ordered a_0, then
/// (cos_m, sin_m) for m = 1 .. l.
std::vector<double> sample_fl_coefficients(int ell, double c_ell, RngStream& rng);

/// lambda_{lm}(theta_i) for m = 0 .. l and the N+1 grid points, row-major in m.
class HarmonicTable {
public:
    HarmonicTable(int ell, const LineGrid& grid);
    int ell() const { return ell_; }
    int points() const { return points_; }
    double operator()(int m, int i) const { return values_[static_cast<std::size_t>(m) * points_ + i]; }

    /// Path from coefficients laid out as in sample_fl_coefficients, scaled by `scale`.
    PathSample synthesize(const std::vector<double>& coeffs, double scale = 1.0) const;

private:
    int ell_;
    int points_;
    std::vector<double> values_;
};

/// Draws coefficients from `rng` and returns f_l on the grid.
PathSample sample_fl_line(int ell, double c_ell, const LineGrid& grid, RngStream& rng);

/// Folded circle weights: channel r in [0, 2N] carries sum of W_j over j = +-r mod 4N.
/// spatial_weights[l] multiplies P_l(cos phi) in the target kernel.
std::vector<double> folded_circle_weights(const std::vector<double>& spatial_weights, int n);

/// Reusable sampler for f_l or the truncated field f.
class LineSampler {
public:
    static LineSampler single_ell(int ell, double c_ell, const LineGrid& grid,
                                  SamplingRoute route = SamplingRoute::harmonic);
    static LineSampler full_field(const PowerSpectrum& spectrum, const LineGrid& grid,
                                  SamplingRoute route = SamplingRoute::automatic);

    SamplingRoute route() const { return route_; }
    const LineGrid& grid() const { return grid_; }

    PathSample sample(std::uint64_t seed, std::uint64_t replication) const;

    /// Single-degree harmonic route only: also returns the drawn coefficients.
    PathSample sample_with_coefficients(std::uint64_t seed, std::uint64_t replication,
                                        std::vector<double>& coeffs) const;

    /// Stream id of the first stream a replication uses.
    std::uint64_t stream_id(std::uint64_t seed, std::uint64_t replication) const;

private:
    LineSampler(const LineGrid& grid, SamplingRoute route) : grid_(grid), route_(route) {}

    LineGrid grid_;
    SamplingRoute route_;
    std::vector<int> degrees_;
    std::vector<double> coefficients_;
    std::vector<HarmonicTable> tables_;
    std::vector<double> circle_sd_;  ///< sqrt of folded weights
    std::vector<double> cos_table_;
    std::vector<double> sin_table_;

    PathSample sample_circle(std::uint64_t seed, std::uint64_t replication) const;
};

/// Sum over l = 1 .. l_max of independent f_l draws.
PathSample sample_f_line(const PowerSpectrum& spectrum, const LineGrid& grid, std::uint64_t seed,
                         std::uint64_t replication, SamplingRoute route = SamplingRoute::automatic);

class FbmSampler {
public:
    FbmSampler(const FbmSpec& spec, const LineGrid& grid, SamplingRoute route = SamplingRoute::automatic);

    SamplingRoute route() const { return route_; }
    FbmPathPair sample(std::uint64_t seed, std::uint64_t replication) const;
    std::uint64_t stream_id(std::uint64_t seed, std::uint64_t replication) const;

private:
    FbmSpec spec_;
    LineGrid grid_;
    SamplingRoute route_;
    double l11_ = 0.0, l21_ = 0.0, l22_ = 0.0;  ///< Cholesky factor of R_H at (t, s)
    std::vector<HarmonicTable> tables_;
    std::vector<double> circle_sd_;
    std::vector<double> cos_table_;
    std::vector<double> sin_table_;
};

FbmPathPair sample_fbm_pair(const FbmSpec& spec, const LineGrid& grid, std::uint64_t seed,
                            std::uint64_t replication, SamplingRoute route = SamplingRoute::automatic);

/// sum_{i=1}^{N} (values[i+1] - values[i])^2.
double quadratic_variation(const PathSample& path);
double quadratic_variation(const std::vector<double>& values);

}  // namespace sphereqv
