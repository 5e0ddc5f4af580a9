#include "rodctl/funcalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "rodctl/errors.hpp"

namespace rodctl {

namespace {

double eval_tol(double a, double b) { return 1e-12 + 1e-9 * (b - a); }

bool same_interval(const Func1D& f, const Func1D& g) {
    const double scale = 1.0 + std::abs(f.a()) + std::abs(f.b());
    return std::abs(f.a() - g.a()) <= 1e-12 * scale && std::abs(f.b() - g.b()) <= 1e-12 * scale;
}

void require_same_interval(const Func1D& f, const Func1D& g) {
    if (!same_interval(f, g)) {
        std::ostringstream os;
        os << "interval mismatch: (" << f.a() << ", " << f.b() << ") vs (" << g.a() << ", " << g.b() << ")";
        fail(ErrorKind::range, os.str());
    }
}

double clenshaw(std::span<const double> c, double x) {
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) {
        const double b0 = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + c[0];
}

}  // namespace

Func1D::Func1D() : c_{0.0, 0.0} {}

Func1D::Func1D(double a, double b, std::vector<double> coeffs, Provenance prov)
    : a_(a), b_(b), c_(std::move(coeffs)), prov_(prov) {
    if (!(b_ > a_)) fail(ErrorKind::domain, "Func1D requires a < b");
    if (c_.size() < 2) c_.resize(2, 0.0);
}

Func1D Func1D::constant(double a, double b, double value) { return Func1D(a, b, {value, 0.0}); }

Func1D Func1D::linear(double a, double b, double c0, double c1) {
    const double h = 0.5 * (b - a);
    return Func1D(a, b, {c0 + c1 * h, c1 * h});
}

double Func1D::operator()(double z) const {
    if (!(z >= a_ && z <= b_)) {
        const double tol = eval_tol(a_, b_);
        if (z < a_ - tol || z > b_ + tol || std::isnan(z)) {
            std::ostringstream os;
            os << "evaluation point " << z << " outside (" << a_ << ", " << b_ << ")";
            fail(ErrorKind::range, os.str());
        }
        z = std::clamp(z, a_, b_);
    }
    const double x = (2.0 * z - a_ - b_) / (b_ - a_);
    return clenshaw(c_, std::clamp(x, -1.0, 1.0));
}

double Func1D::left() const {
    double s = 0.0, sign = 1.0;
    for (double c : c_) {
        s += sign * c;
        sign = -sign;
    }
    return s;
}

double Func1D::right() const {
    double s = 0.0;
    for (double c : c_) s += c;
    return s;
}

double Func1D::max_abs_coeff() const {
    double m = 0.0;
    for (double c : c_) m = std::max(m, std::abs(c));
    return m;
}

Func1D& Func1D::operator+=(const Func1D& o) { return add_scaled(o, 1.0); }
Func1D& Func1D::operator-=(const Func1D& o) { return add_scaled(o, -1.0); }

Func1D& Func1D::operator*=(double s) {
    for (double& c : c_) c *= s;
    return *this;
}

Func1D& Func1D::add_scaled(const Func1D& o, double s) {
    if (s == 0.0) return *this;
    require_same_interval(*this, o);
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += s * o.c_[k];
    prov_ = Provenance::derived;
    return *this;
}

Func1D& Func1D::add_constant(double c) {
    c_[0] += c;
    return *this;
}

void Func1D::chop(double rel_tol) {
    const double cut = rel_tol * max_abs_coeff();
    std::size_t n = c_.size();
    while (n > 2 && std::abs(c_[n - 1]) <= cut) --n;
    c_.resize(n);
}

Func1D operator+(Func1D f, const Func1D& g) { return f += g; }
Func1D operator-(Func1D f, const Func1D& g) { return f -= g; }
Func1D operator*(double s, Func1D f) { return f *= s; }
Func1D operator-(Func1D f) { return f *= -1.0; }

Func1D interpolate(const ScalarFn& source, double a, double b, int degree, Provenance prov) {
    if (degree < 1) fail(ErrorKind::domain, "interpolation degree must be >= 1");
    if (!(b > a)) fail(ErrorKind::domain, "interpolation interval is degenerate");
    const int n = degree;
    std::vector<double> f(n + 1);
    for (int j = 0; j <= n; ++j) {
        // x_j = cos(pi j / n) runs from +1 to -1
        const double x = std::cos(std::numbers::pi * j / n);
        double z = a + 0.5 * (b - a) * (x + 1.0);
        if (j == 0) z = b;
        if (j == n) z = a;
        f[j] = source(z);
        if (!std::isfinite(f[j])) {
            std::ostringstream os;
            os << "non-finite sample at z = " << z;
            fail(ErrorKind::data, os.str());
        }
    }
    std::vector<double> c(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        double s = 0.5 * (f[0] + ((k % 2) ? -f[n] : f[n]));
        for (int j = 1; j < n; ++j) s += f[j] * std::cos(std::numbers::pi * j * k / n);
        c[k] = 2.0 * s / n;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    Func1D out(a, b, std::move(c), prov);
    out.chop(1e-15);
    return out;
}

Func1D differentiate(const Func1D& f) {
    const auto c = f.coeffs();
    const int n = f.degree();
    std::vector<double> d(std::max(n, 2), 0.0);
    if (n >= 1) {
        std::vector<double> dd(n + 2, 0.0);
        for (int k = n; k >= 1; --k) dd[k - 1] = dd[k + 1] + 2.0 * k * c[k];
        dd[0] *= 0.5;
        const double scale = 2.0 / f.length();
        for (int k = 0; k < n; ++k) d[k] = dd[k] * scale;
    }
    return Func1D(f.a(), f.b(), std::move(d));
}

Func1D antiderivative(const Func1D& f, double anchor_value) {
    const auto c = f.coeffs();
    const int n = f.degree();
    auto coef = [&](int k) { return (k >= 0 && k <= n) ? c[k] : 0.0; };
    std::vector<double> C(n + 2, 0.0);
    C[1] = coef(0) - 0.5 * coef(2);
    for (int k = 2; k <= n + 1; ++k) C[k] = (coef(k - 1) - coef(k + 1)) / (2.0 * k);
    const double h = 0.5 * f.length();
    double at_left = 0.0;
    for (int k = 1; k <= n + 1; ++k) {
        C[k] *= h;
        at_left += (k % 2 ? -C[k] : C[k]);
    }
    C[0] = anchor_value - at_left;
    return Func1D(f.a(), f.b(), std::move(C));
}

double integral(const Func1D& f) {
    const auto c = f.coeffs();
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); k += 2) s += c[k] * 2.0 / (1.0 - static_cast<double>(k * k));
    return s * 0.5 * f.length();
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::pair<std::vector<double>, std::vector<double>>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (slot) return *slot;
    if (n < 1) fail(ErrorKind::domain, "Gauss-Legendre order must be positive");
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    slot = std::make_unique<std::pair<std::vector<double>, std::vector<double>>>(std::move(x), std::move(w));
    return *slot;
}

double weighted_energy(const Func1D& f, const Func1D& weight) {
    require_same_interval(f, weight);
    const Func1D g = differentiate(f);
    const int deg = 2 * g.degree() + weight.degree();
    const int nq = deg / 2 + 2;
    const auto& [x, w] = gauss_legendre(nq);
    const double h = 0.5 * f.length();
    const double mid = 0.5 * (f.a() + f.b());
    const double wscale = weight.max_abs_coeff();
    double s = 0.0;
    for (int q = 0; q < nq; ++q) {
        const double z = mid + h * x[q];
        const double wz = weight(z);
        if (wz < -1e-13 * wscale) {
            std::ostringstream os;
            os << "negative weight " << wz << " at z = " << z;
            fail(ErrorKind::domain, os.str());
        }
        const double gz = g(z);
        s += w[q] * gz * gz * wz;
    }
    return s * h;
}

Func1D compose_affine(const Func1D& f, double origin, double scale, double length) {
    if (!(length > 0.0)) fail(ErrorKind::domain, "window length must be positive");
    const double lo = std::min(origin, origin + scale * length);
    const double hi = std::max(origin, origin + scale * length);
    const double tol = eval_tol(f.a(), f.b());
    if (lo < f.a() - tol || hi > f.b() + tol) {
        std::ostringstream os;
        os << "window (" << lo << ", " << hi << ") outside (" << f.a() << ", " << f.b() << ")";
        fail(ErrorKind::range, os.str());
    }
    Func1D out = interpolate([&](double z) { return f(origin + scale * z); }, 0.0, length,
                             std::max(f.degree(), 1), f.provenance());
    return out;
}

Func1D shift_restrict(const Func1D& f, double shift, double length) {
    return compose_affine(f, shift, 1.0, length);
}

double max_deviation(const Func1D& f, const ScalarFn& g, int samples) {
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double z = f.a() + f.length() * i / (samples - 1);
        m = std::max(m, std::abs(f(z) - g(z)));
    }
    return m;
}

}  // namespace rodctl
