#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "gevrey/errors.hpp"

namespace gevrey {

// Per-variable caps of each group. Exponents above a cap are dropped, which
// makes the stored coefficients an exact quotient of the full series ring.
struct Truncation {
    int t = 6;
    int x = 6;
    int z = 6;

    bool operator==(const Truncation&) const = default;
};

namespace detail {

// Dense box layout shared between series of the same shape.
struct SeriesLayout {
    int d = 1;
    int nz = 1;
    Truncation tr;
    std::vector<int> caps;
    std::vector<std::size_t> strides;
    std::size_t size = 1;
    std::vector<int> table; // size * nvars exponents, row per index

    int nvars() const { return 1 + d + nz; }

    SeriesLayout(int d_, int nz_, Truncation tr_) : d(d_), nz(nz_), tr(tr_)
    {
        if (d < 0 || nz < 0 || tr.t < 0 || tr.x < 0 || tr.z < 0)
            throw Error(ErrorCode::argument, "negative series dimension or cap");
        caps.push_back(tr.t);
        for (int i = 0; i < d; ++i) caps.push_back(tr.x);
        for (int i = 0; i < nz; ++i) caps.push_back(tr.z);
        strides.assign(caps.size(), 1);
        for (std::size_t v = caps.size(); v-- > 0;) {
            strides[v] = size;
            size *= static_cast<std::size_t>(caps[v] + 1);
        }
        table.resize(size * caps.size());
        for (std::size_t i = 0; i < size; ++i) {
            std::size_t rem = i;
            for (std::size_t v = 0; v < caps.size(); ++v) {
                table[i * caps.size() + v] = static_cast<int>(rem / strides[v]);
                rem %= strides[v];
            }
        }
    }

    const int* exps(std::size_t i) const { return table.data() + i * caps.size(); }
};

inline std::shared_ptr<const SeriesLayout> make_layout(int d, int nz, Truncation tr)
{
    return std::make_shared<const SeriesLayout>(d, nz, tr);
}

} // namespace detail

// Truncated multivariate Taylor polynomial in (t, x_1..x_d, z_1..z_nz).
// For symbols z is the frequency offset xi - xi0 and nz == d; composition
// data reuses the third group for the state variables u.
template <class T>
class basic_taylor_series {
public:
    using value_type = T;

    basic_taylor_series() : basic_taylor_series(1, Truncation{}) {}

    basic_taylor_series(int d, Truncation tr, int nz = -1)
        : layout_(detail::make_layout(d, nz < 0 ? d : nz, tr)), c_(layout_->size, T(0))
    {
    }

    explicit basic_taylor_series(std::shared_ptr<const detail::SeriesLayout> layout)
        : layout_(std::move(layout)), c_(layout_->size, T(0))
    {
    }

    static basic_taylor_series constant(int d, Truncation tr, T value, int nz = -1)
    {
        basic_taylor_series s(d, tr, nz);
        s.c_[0] = value;
        return s;
    }

    // var 0 is t, 1..d are x, d+1.. are z.
    static basic_taylor_series variable(int d, Truncation tr, int var, int nz = -1)
    {
        basic_taylor_series s(d, tr, nz);
        if (var < 0 || var >= s.nvars())
            throw Error(ErrorCode::argument, "variable index out of range");
        if (s.layout_->caps[var] >= 1) s.c_[s.layout_->strides[var]] = T(1);
        return s;
    }

    basic_taylor_series zero_like() const { return basic_taylor_series(layout_); }

    basic_taylor_series constant_like(T value) const
    {
        basic_taylor_series s(layout_);
        s.c_[0] = value;
        return s;
    }

    int dim() const { return layout_->d; }
    int nz() const { return layout_->nz; }
    int nvars() const { return layout_->nvars(); }
    const Truncation& truncation() const { return layout_->tr; }
    const std::vector<int>& caps() const { return layout_->caps; }
    std::size_t size() const { return c_.size(); }
    const std::shared_ptr<const detail::SeriesLayout>& layout() const { return layout_; }

    int total_cap() const { return std::accumulate(layout_->caps.begin(), layout_->caps.end(), 0); }

    bool compatible(const basic_taylor_series& o) const
    {
        return layout_ == o.layout_ ||
               (layout_->d == o.layout_->d && layout_->nz == o.layout_->nz && layout_->tr == o.layout_->tr);
    }

    const int* exponents(std::size_t i) const { return layout_->exps(i); }

    T operator[](std::size_t i) const { return c_[i]; }
    T& operator[](std::size_t i) { return c_[i]; }

    bool in_range(const std::vector<int>& e) const
    {
        if (static_cast<int>(e.size()) != nvars()) return false;
        for (int v = 0; v < nvars(); ++v)
            if (e[v] < 0 || e[v] > layout_->caps[v]) return false;
        return true;
    }

    std::size_t index(const std::vector<int>& e) const
    {
        if (!in_range(e)) throw Error(ErrorCode::truncation, "exponent outside truncation box");
        std::size_t i = 0;
        for (int v = 0; v < nvars(); ++v) i += static_cast<std::size_t>(e[v]) * layout_->strides[v];
        return i;
    }

    T coef(const std::vector<int>& e) const { return in_range(e) ? c_[index(e)] : T(0); }
    void set(const std::vector<int>& e, T v) { c_[index(e)] = v; }
    void add_to(const std::vector<int>& e, T v) { c_[index(e)] += v; }

    T constant_term() const { return c_[0]; }

    double max_abs() const
    {
        double m = 0;
        for (const auto& v : c_) m = std::max(m, static_cast<double>(std::abs(v)));
        return m;
    }

    bool is_zero(double tol = 1e-12) const { return max_abs() <= tol; }

    basic_taylor_series& operator+=(const basic_taylor_series& o)
    {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }

    basic_taylor_series& operator-=(const basic_taylor_series& o)
    {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }

    basic_taylor_series& operator*=(T a)
    {
        for (auto& v : c_) v *= a;
        return *this;
    }

    friend basic_taylor_series operator+(basic_taylor_series a, const basic_taylor_series& b) { return a += b; }
    friend basic_taylor_series operator-(basic_taylor_series a, const basic_taylor_series& b) { return a -= b; }
    friend basic_taylor_series operator*(basic_taylor_series a, T s) { return a *= s; }
    friend basic_taylor_series operator*(T s, basic_taylor_series a) { return a *= s; }
    friend basic_taylor_series operator-(basic_taylor_series a) { return a *= T(-1); }

    basic_taylor_series operator+(T s) const
    {
        basic_taylor_series r = *this;
        r.c_[0] += s;
        return r;
    }

    basic_taylor_series operator-(T s) const { return *this + (-s); }

    friend basic_taylor_series operator*(const basic_taylor_series& a, const basic_taylor_series& b)
    {
        a.check(b);
        basic_taylor_series r(a.layout_);
        const auto& L = *a.layout_;
        const std::size_t nv = L.caps.size();
        std::vector<std::size_t> nzb;
        nzb.reserve(b.c_.size());
        for (std::size_t j = 0; j < b.c_.size(); ++j)
            if (b.c_[j] != T(0)) nzb.push_back(j);
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == T(0)) continue;
            const int* ei = L.exps(i);
            for (std::size_t j : nzb) {
                const int* ej = L.exps(j);
                bool ok = true;
                for (std::size_t v = 0; v < nv; ++v)
                    if (ei[v] + ej[v] > L.caps[v]) {
                        ok = false;
                        break;
                    }
                if (ok) r.c_[i + j] += a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

    basic_taylor_series pow(int m) const
    {
        if (m < 0) throw Error(ErrorCode::argument, "negative power");
        basic_taylor_series r = constant_like(T(1));
        for (int i = 0; i < m; ++i) r = r * *this;
        return r;
    }

    basic_taylor_series deriv(int var) const
    {
        basic_taylor_series r(layout_);
        const auto& L = *layout_;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const int e = L.exps(i)[var];
            if (e == 0 || c_[i] == T(0)) continue;
            r.c_[i - L.strides[var]] += c_[i] * T(e);
        }
        return r;
    }

    // Multiply by var^m; terms pushed beyond the cap are dropped.
    basic_taylor_series shift_up(int var, int m) const
    {
        basic_taylor_series r(layout_);
        const auto& L = *layout_;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const int e = L.exps(i)[var];
            if (e + m > L.caps[var]) continue;
            r.c_[i + static_cast<std::size_t>(m) * L.strides[var]] = c_[i];
        }
        return r;
    }

    // Divide by var^m. The dropped low-order part is returned through low_abs.
    basic_taylor_series shift_down(int var, int m, double* low_abs = nullptr) const
    {
        basic_taylor_series r(layout_);
        const auto& L = *layout_;
        double low = 0;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const int e = L.exps(i)[var];
            if (e < m) {
                low = std::max(low, static_cast<double>(std::abs(c_[i])));
                continue;
            }
            r.c_[i - static_cast<std::size_t>(m) * L.strides[var]] = c_[i];
        }
        if (low_abs) *low_abs = low;
        return r;
    }

    // Coefficient of t^j, as a series with no t dependence.
    basic_taylor_series slice_t(int j) const
    {
        basic_taylor_series r(layout_);
        const auto& L = *layout_;
        if (j < 0 || j > L.caps[0]) return r;
        const std::size_t off = static_cast<std::size_t>(j) * L.strides[0];
        for (std::size_t i = 0; i < L.strides[0]; ++i) r.c_[i] = c_[i + off];
        return r;
    }

    bool depends_on(int var, double tol = 0) const
    {
        const auto& L = *layout_;
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (L.exps(i)[var] > 0 && std::abs(c_[i]) > tol) return true;
        return false;
    }

    // Set variable var to zero.
    basic_taylor_series restrict_zero(int var) const
    {
        basic_taylor_series r(layout_);
        const auto& L = *layout_;
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (L.exps(i)[var] == 0) r.c_[i] = c_[i];
        return r;
    }

    // Horner composition t -> tau with tau free of t.
    basic_taylor_series substitute_t(const basic_taylor_series& tau) const
    {
        check(tau);
        if (tau.depends_on(0))
            throw Error(ErrorCode::argument, "substitute_t needs a t-free argument");
        const int D = layout_->caps[0];
        basic_taylor_series r = slice_t(D);
        for (int j = D - 1; j >= 0; --j) r = r * tau + slice_t(j);
        return r;
    }

    // Synthetic division by (t - tau): *this = (t - tau) q + rem, rem free of t.
    basic_taylor_series divide_t_minus(const basic_taylor_series& tau, basic_taylor_series* rem = nullptr) const
    {
        check(tau);
        const int D = layout_->caps[0];
        std::vector<basic_taylor_series> b(static_cast<std::size_t>(std::max(D, 1)), zero_like());
        if (D == 0) {
            if (rem) *rem = slice_t(0);
            return zero_like();
        }
        b[D - 1] = slice_t(D);
        for (int j = D - 1; j >= 1; --j) b[j - 1] = slice_t(j) + tau * b[j];
        if (rem) *rem = slice_t(0) + tau * b[0];
        basic_taylor_series q(layout_);
        for (int j = 0; j < D; ++j) q += b[j].shift_up(0, j);
        return q;
    }

    // Truncated Neumann inverse about the constant term.
    basic_taylor_series inverse() const
    {
        const T a0 = c_[0];
        if (std::abs(a0) == 0) throw Error(ErrorCode::numeric, "series inverse with zero constant term");
        basic_taylor_series h = *this * (T(1) / a0);
        h.c_[0] = T(0);
        basic_taylor_series sum = constant_like(T(1));
        basic_taylor_series term = constant_like(T(1));
        for (int m = 1; m <= total_cap(); ++m) {
            term = -(term * h);
            if (term.max_abs() == 0) break;
            sum += term;
        }
        return sum * (T(1) / a0);
    }

    // Square root with positive constant term, via the binomial series.
    basic_taylor_series sqrt() const
    {
        const T a0 = c_[0];
        if (!(a0 > T(0))) throw Error(ErrorCode::numeric, "series sqrt needs a positive constant term");
        basic_taylor_series h = *this * (T(1) / a0);
        h.c_[0] = T(0);
        basic_taylor_series sum = constant_like(T(1));
        basic_taylor_series term = constant_like(T(1));
        T binom = T(1);
        for (int m = 1; m <= total_cap(); ++m) {
            binom *= (T(0.5) - T(m - 1)) / T(m);
            term = term * h;
            if (term.max_abs() == 0) break;
            sum += term * binom;
        }
        return sum * std::sqrt(a0);
    }

    T eval(const std::vector<double>& point) const
    {
        const auto& L = *layout_;
        const std::size_t nv = L.caps.size();
        if (point.size() != nv) throw Error(ErrorCode::argument, "evaluation point has wrong dimension");
        std::vector<std::vector<double>> pw(nv);
        for (std::size_t v = 0; v < nv; ++v) {
            pw[v].assign(static_cast<std::size_t>(L.caps[v]) + 1, 1.0);
            for (int e = 1; e <= L.caps[v]; ++e) pw[v][e] = pw[v][e - 1] * point[v];
        }
        T acc = T(0);
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == T(0)) continue;
            const int* e = L.exps(i);
            double m = 1;
            for (std::size_t v = 0; v < nv; ++v) m *= pw[v][e[v]];
            acc += c_[i] * m;
        }
        return acc;
    }

    T eval(double t, const std::vector<double>& x, const std::vector<double>& z) const
    {
        std::vector<double> p;
        p.reserve(static_cast<std::size_t>(nvars()));
        p.push_back(t);
        p.insert(p.end(), x.begin(), x.end());
        p.insert(p.end(), z.begin(), z.end());
        return eval(p);
    }

    // Max coefficient difference restricted to t-exponents <= tmax.
    double max_abs_diff(const basic_taylor_series& o, int tmax) const
    {
        check(o);
        double m = 0;
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (layout_->exps(i)[0] <= tmax) m = std::max(m, static_cast<double>(std::abs(c_[i] - o.c_[i])));
        return m;
    }

private:
    void check(const basic_taylor_series& o) const
    {
        if (!compatible(o)) throw Error(ErrorCode::argument, "series with mismatched shapes");
    }

    std::shared_ptr<const detail::SeriesLayout> layout_;
    std::vector<T> c_;
};

using TaylorSeries = basic_taylor_series<double>;

} // namespace gevrey
