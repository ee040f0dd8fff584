#pragma once

// Covariance structure of an isotropic Gaussian field observed along one
// meridian: the angular power spectrum, the line grid, the Gram matrix of the
// increment vector, and the two-time kernel of the sphere-valued fBm.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sphereqv {

/// Angular power spectrum C_l, either an explicit list or the power-law family
/// C_l = c0 * l^(-2-eps) for l >= 1, truncated at l_max.
class PowerSpectrum {
public:
    enum class Kind { explicit_values, power_law };

    /// values[l] = C_l for l = 0 .. values.size() - 1. The l = 0 entry only
    /// matters for the fBm kernel; the field decomposition starts at l = 1.
    static PowerSpectrum from_values(std::vector<double> values);
    static PowerSpectrum power_law(double amplitude, double epsilon, int l_max);

    Kind kind() const { return kind_; }
    int l_max() const { return l_max_; }
    double amplitude() const { return amplitude_; }
    double epsilon() const { return epsilon_; }

    /// C_l, zero above l_max (and at l = 0 for the power law).
    double coefficient(int ell) const;

    /// sum_{1 <= l <= l_max} C_l (2l+1) / (4 pi), the pointwise variance of the truncated field.
    double pointwise_variance() const;

    /// sum_{l > l_max} C_l (2l+1) / (4 pi). Zero for explicit lists.
    double tail_variance() const;

    /// Bound on how much any increment-Gram entry moves when the omitted
    /// degrees are added back: |E[D_i D_j]| <= E[D_i^2] <= 4 * tail_variance().
    double truncation_tail_bound() const { return 4.0 * tail_variance(); }

    /// Same spectrum with a different truncation degree (power law only).
    PowerSpectrum with_l_max(int l_max) const;

private:
    Kind kind_ = Kind::explicit_values;
    std::vector<double> values_;
    double amplitude_ = 0.0;
    double epsilon_ = 0.0;
    int l_max_ = 0;
};

struct DefaultTruncation {
    int l_max = 0;
    bool capped = false;  ///< tolerance not reached before the cap
};

/// Smallest power-of-two l_max whose tail bound is <= rel_tol times the
/// diagonal of the increment Gram on an N-grid, limited to cap.
DefaultTruncation default_l_max(double amplitude, double epsilon, int n, double rel_tol = 1e-6, int cap = 1 << 16);

/// The N+1 points theta_i = (i/N)(pi/2), i = 1 .. N+1, on one meridian.
class LineGrid {
public:
    explicit LineGrid(int n);
    int n() const { return n_; }
    int point_count() const { return n_ + 1; }
    double spacing() const;
    /// theta_i for i in [1, N+1].
    double theta(int i) const;
    std::vector<double> points() const;

private:
    int n_;
};

/// Covariance matrix of the increments D_i = f(theta_{i+1}) - f(theta_i), i = 1..N.
struct IncrementGram {
    int n = 0;
    Eigen::MatrixXd sigma;

    /// Symmetric Toeplitz matrix with first row `lags`.
    static IncrementGram from_lags(std::span<const double> lags);
};

struct FieldGram {
    IncrementGram gram;
    double tail_bound = 0.0;  ///< PowerSpectrum::truncation_tail_bound()
};

/// Sphere-valued fBm observed at two times. The spatial kernel is
/// sum_l A_l (2l+1) P_l(cos d), without the 1/(4 pi) of the field kernel.
struct FbmSpec {
    double hurst = 0.5;
    PowerSpectrum spectrum;
    double t = 1.0;
    double s = 2.0;

    void validate() const;
};

/// C_l (2l+1)/(4 pi) P_l(cos|theta1 - theta2|).
double kernel_fl(int ell, double c_ell, double theta1, double theta2);

/// Covariance of the truncated field f = sum_{l=1}^{l_max} f_l.
double kernel_f(const PowerSpectrum& spectrum, double theta1, double theta2);

/// sum_{l=0}^{l_max} A_l (2l+1) P_l(cos d).
double fbm_spatial_kernel(const PowerSpectrum& spectrum, double theta1, double theta2);

/// 2 P_l(cos(k h)) - P_l(cos((k-1) h)) - P_l(cos((k+1) h)), h = pi/(2N), 1 <= k <= N-1.
double second_difference_p(int ell, int k, int n);

IncrementGram increment_gram_fl(int ell, double c_ell, const LineGrid& grid);

/// How omitted degrees l > l_max enter the Gram matrix: dropped (none), or
/// added as spatially white noise of variance tail_variance() at each point,
/// which is the limit of their kernel on a grid coarser than their wavelength.
enum class TailClosure { none, white_noise };

FieldGram increment_gram_f(const PowerSpectrum& spectrum, const LineGrid& grid,
                           TailClosure closure = TailClosure::none);

/// R_H(t, s) = (t^2H + s^2H - |t - s|^2H) / 2.
double fbm_time_covariance(double hurst, double t, double s);

/// 2N x 2N covariance of (increments of B_t, increments of B_s) along the grid.
Eigen::MatrixXd fbm_joint_gram(const FbmSpec& spec, const LineGrid& grid);

}  // namespace sphereqv
