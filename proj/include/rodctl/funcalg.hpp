#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace rodctl {

enum class Provenance { data, derived };

/// Numeric knobs shared by the function algebra.
struct FuncOptions {
    int degree = 64;
    int max_degree = 1024;
    double interp_tol = 1e-10;
    double quad_tol = 1e-9;
};

/// Chebyshev series on a closed interval [a, b].
class Func1D {
public:
    Func1D();
    Func1D(double a, double b, std::vector<double> coeffs, Provenance prov = Provenance::derived);

    [[nodiscard]] static Func1D constant(double a, double b, double value);
    /// z -> c0 + c1 * (z - a)
    [[nodiscard]] static Func1D linear(double a, double b, double c0, double c1);

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double length() const noexcept { return b_ - a_; }
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] std::span<const double> coeffs() const noexcept { return c_; }
    [[nodiscard]] Provenance provenance() const noexcept { return prov_; }

    /// Evaluation; points within a small tolerance outside [a, b] are clamped, farther ones throw.
    [[nodiscard]] double operator()(double z) const;
    [[nodiscard]] double left() const;
    [[nodiscard]] double right() const;
    [[nodiscard]] double max_abs_coeff() const;

    Func1D& operator+=(const Func1D& o);
    Func1D& operator-=(const Func1D& o);
    Func1D& operator*=(double s);
    Func1D& add_scaled(const Func1D& o, double s);
    Func1D& add_constant(double c);

    /// Drop trailing coefficients below rel_tol * max|c| (degree stays >= 1).
    void chop(double rel_tol);

private:
    double a_ = 0.0, b_ = 1.0;
    std::vector<double> c_;
    Provenance prov_ = Provenance::derived;
};

[[nodiscard]] Func1D operator+(Func1D f, const Func1D& g);
[[nodiscard]] Func1D operator-(Func1D f, const Func1D& g);
[[nodiscard]] Func1D operator*(double s, Func1D f);
[[nodiscard]] Func1D operator-(Func1D f);

using ScalarFn = std::function<double(double)>;

[[nodiscard]] Func1D interpolate(const ScalarFn& source, double a, double b, int degree,
                                 Provenance prov = Provenance::derived);
[[nodiscard]] Func1D differentiate(const Func1D& f);
[[nodiscard]] Func1D antiderivative(const Func1D& f, double anchor_value);
[[nodiscard]] double integral(const Func1D& f);
/// Integral of f'(z)^2 * weight(z) with Gauss-Legendre quadrature exact for the product degree.
[[nodiscard]] double weighted_energy(const Func1D& f, const Func1D& weight);
/// z -> f(z + shift) on (0, length).
[[nodiscard]] Func1D shift_restrict(const Func1D& f, double shift, double length);
/// z -> f(origin + scale * z) on (0, length).
[[nodiscard]] Func1D compose_affine(const Func1D& f, double origin, double scale, double length);
/// Max deviation |f - g| sampled on a uniform probe grid.
[[nodiscard]] double max_deviation(const Func1D& f, const ScalarFn& g, int samples = 1000);

/// Gauss-Legendre nodes and weights on [-1, 1]; cached per size, thread safe.
[[nodiscard]] const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

}  // namespace rodctl
