// State families: Werner, isotropic, UUVVF-invariant, Watrous and rainbow
// states, twirl coordinate extraction and the canonical test vectors.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "distilkit/linalg.hpp"
#include "distilkit/tensor_sum.hpp"

namespace distilkit {

constexpr double kBoundaryTol = 1e-12;

enum class FamilyTag { Werner, Isotropic, Uuvvf, Watrous, Rainbow };

// Positivity inequalities, as evaluated (state valid iff all >= -tol).
inline std::array<double, 3> uuvvf_inequalities(int d, double eps, double delta) {
    const double dd = d;
    return {(dd - 1) * (dd - 1) + 2 * eps * dd * (dd - 1) + delta * dd * dd,
            dd * dd - 1 + 2 * eps * dd - delta * dd * dd,
            (dd + 1) * (dd + 1) - 2 * eps * dd * (dd + 1) + delta * dd * dd};
}

// Three spectral-sector inequalities plus the mixed sector that is symmetric
// on the m pair and antisymmetric on the d pair; for m < d the fourth one is
// strictly tighter than the second, so both must be enforced.
inline std::array<double, 4> rainbow_inequalities(int m, int d, double eps, double delta) {
    const double md = static_cast<double>(m) * d;
    return {1 + delta + 2 * eps + 1 / md - (eps + 1) * (m + d) / md,
            1 - 1 / md + eps * (m + d) / md - delta + 1.0 / m - 1.0 / d,
            1 + delta - 2 * eps + 1 / md + (1 - eps) * (m + d) / md,
            1 - 1 / md + eps * (m + d) / md - delta + 1.0 / d - 1.0 / m};
}

inline double watrous_delta(int d, double eps) {
    return (static_cast<double>(d) * d - 1 + 2 * eps * d) / (static_cast<double>(d) * d);
}

struct FamilyState {
    FamilyTag tag;
    int d = 2;
    int m = 0;  // rainbow only
    double p1 = 0.0, p2 = 0.0;

    double beta() const { return p1; }
    double alpha() const { return p1; }
    double epsilon() const { return p1; }
    double delta() const { return p2; }
};

inline FamilyState werner(int d, double beta) {
    if (d < 2) throw std::invalid_argument("werner: d must be >= 2");
    if (beta < -1 - kBoundaryTol || beta > 1 + kBoundaryTol)
        throw std::invalid_argument("werner: beta must lie in [-1, 1]");
    return {FamilyTag::Werner, d, 0, beta, 0.0};
}

inline FamilyState isotropic(int d, double alpha) {
    if (d < 2) throw std::invalid_argument("isotropic: d must be >= 2");
    if (alpha < -1 - kBoundaryTol)
        throw std::invalid_argument("isotropic: alpha must be >= -1");
    return {FamilyTag::Isotropic, d, 0, alpha, 0.0};
}

inline FamilyState uuvvf(int d, double eps, double delta) {
    if (d < 2) throw std::invalid_argument("uuvvf: d must be >= 2");
    auto ineq = uuvvf_inequalities(d, eps, delta);
    for (double v : ineq)
        if (v < -kBoundaryTol)
            throw std::invalid_argument("uuvvf: density inequality violated (" +
                                        std::to_string(v) + ")");
    return {FamilyTag::Uuvvf, d, 0, eps, delta};
}

inline FamilyState watrous(int d, double eps) {
    if (d < 2) throw std::invalid_argument("watrous: d must be >= 2");
    if (eps <= 1.0 / d - 1 - kBoundaryTol || eps >= 1 + 1.0 / d + kBoundaryTol)
        throw std::invalid_argument("watrous: eps out of range (1/d-1, 1+1/d)");
    return {FamilyTag::Watrous, d, 0, eps, watrous_delta(d, eps)};
}

inline FamilyState rainbow(int m, int d, double eps, double delta) {
    if (!(3 <= m && m < d)) throw std::invalid_argument("rainbow: need 3 <= m < d");
    auto ineq = rainbow_inequalities(m, d, eps, delta);
    for (double v : ineq)
        if (v < -kBoundaryTol)
            throw std::invalid_argument("rainbow: density inequality violated (" +
                                        std::to_string(v) + ")");
    return {FamilyTag::Rainbow, d, m, eps, delta};
}

// Structured form with the conventional unnormalized coefficients; the
// trace factor is stored in .normalization.
inline TensorSumOperator structured(const FamilyState& s) {
    TensorSumOperator t;
    using PF = PairFactor;
    switch (s.tag) {
        case FamilyTag::Werner:
            t.pairs = {{s.d, s.d}};
            t.terms = {{1.0, {PF::identity()}}, {s.beta(), {PF::swap()}}};
            break;
        case FamilyTag::Isotropic:
            t.pairs = {{s.d, s.d}};
            t.terms = {{1.0, {PF::identity()}}, {s.alpha(), {PF::maxent()}}};
            break;
        case FamilyTag::Uuvvf:
        case FamilyTag::Watrous: {
            const double d = s.d, eps = s.epsilon(), delta = s.delta();
            const double cm = (eps * d - 1) / d;
            const double cf = (1 - 2 * eps * d + delta * d * d) / (d * d);
            t.pairs = {{s.d, s.d}, {s.d, s.d}};
            t.terms = {{1.0, {PF::identity(), PF::identity()}},
                       {cm, {PF::identity(), PF::swap()}},
                       {cm, {PF::swap(), PF::identity()}},
                       {cf, {PF::swap(), PF::swap()}}};
            break;
        }
        case FamilyTag::Rainbow: {
            const double d = s.d, m = s.m, eps = s.epsilon(), delta = s.delta();
            // pair 0 carries the m (x) m factor, pair 1 the d (x) d factor.
            t.pairs = {{s.m, s.m}, {s.d, s.d}};
            t.terms = {{1.0, {PF::identity(), PF::identity()}},
                       {(d * eps - 1) / d, {PF::identity(), PF::swap()}},
                       {(m * eps - 1) / m, {PF::swap(), PF::identity()}},
                       {(1 - (m + d) * eps + d * m * delta) / (d * m),
                        {PF::swap(), PF::swap()}}};
            break;
        }
    }
    t.normalization = t.trace();
    return t;
}

inline DenseOperator dense(const FamilyState& s) { return structured(s).dense(true); }

// beta of the Werner state obtained by U (x) U twirling; Tr(rho F) invariant.
inline double twirl_to_werner(const DenseOperator& rho) {
    if (rho.dim_a != rho.dim_b)
        throw std::invalid_argument("twirl_to_werner: need a d (x) d state");
    const int d = rho.dim_a;
    const double f = (rho.mat * flip_operator(d)).trace().real();
    if (std::abs(f) > 1 + 1e-9)
        throw std::invalid_argument("twirl_to_werner: |Tr(rho F)| > 1, not a state");
    return (f * d - 1) / (d - f);
}

enum class CoordConvention { Raw, Tilde };

struct CoordinateVector {
    std::vector<std::string> basis_labels;
    std::vector<double> coords;
    CoordConvention convention = CoordConvention::Raw;
};

// Coordinates of the commutant (twirl) projection of rho in the given basis,
// solved from the Hilbert-Schmidt Gram system G c = t.
inline std::vector<double> invariant_coordinates(
    const std::vector<Complex>& t_vec, const std::vector<TensorSumOperator>& basis) {
    const int n = static_cast<int>(basis.size());
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = hs_inner(basis[i], basis[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0) || hi / lo > 1e12)
        throw std::invalid_argument("invariant_coordinates: singular Gram matrix");
    Vector t(n);
    for (int i = 0; i < n; ++i) t[i] = t_vec[i];
    Vector c = g.ldlt().solve(t);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = c[i].real();
    return out;
}

inline std::vector<double> invariant_coordinates(
    const Matrix& rho, const std::vector<TensorSumOperator>& basis) {
    std::vector<Complex> t;
    t.reserve(basis.size());
    for (const auto& b : basis) {
        DenseOperator bd = b.dense(false);
        t.push_back((bd.mat.adjoint() * rho).trace() / b.normalization);
    }
    return invariant_coordinates(t, basis);
}

inline std::vector<double> invariant_coordinates(
    const DenseOperator& rho, const std::vector<TensorSumOperator>& basis) {
    return invariant_coordinates(rho.mat, basis);
}

// Pure-state path: t_i = <v|B_i|v> via structured application, so the basis
// never needs dense expansion.
inline std::vector<double> invariant_coordinates(
    const Vector& v, const std::vector<TensorSumOperator>& basis) {
    std::vector<Complex> t;
    t.reserve(basis.size());
    for (const auto& b : basis) t.push_back(v.dot(apply(b, v)));
    return invariant_coordinates(t, basis);
}

namespace detail {

// All arrangements of n_proj projectors among n pairs of dimension d, summed,
// with Q = I - P expanded so that only Identity/MaxEntProj factors remain.
// tilde_q divides every Q slot by (d^2 - 1).
inline TensorSumOperator symmetric_grade_basis(int n, int d, int n_proj, bool tilde_q) {
    TensorSumOperator t;
    t.pairs.assign(n, PairDims{d, d});
    const double qn = tilde_q ? 1.0 / (static_cast<double>(d) * d - 1) : 1.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != n_proj) continue;
        // expand Q^(n - n_proj) into sum over subsets carrying -P
        std::vector<int> q_slots;
        for (int k = 0; k < n; ++k)
            if (!((mask >> k) & 1u)) q_slots.push_back(k);
        const int nq = static_cast<int>(q_slots.size());
        for (std::uint32_t sub = 0; sub < (1u << nq); ++sub) {
            TensorSumTerm term;
            term.coeff = 1.0;
            term.factors.assign(n, PairFactor::identity());
            for (int k = 0; k < n; ++k)
                if ((mask >> k) & 1u) term.factors[k] = PairFactor::maxent();
            for (int q = 0; q < nq; ++q) {
                term.coeff *= qn;
                if ((sub >> q) & 1u) {
                    term.coeff *= -1.0;
                    term.factors[q_slots[q]] = PairFactor::maxent();
                }
            }
            t.terms.push_back(std::move(term));
        }
    }
    return t;
}

// Prefixes a fixed P2 or Q2-tilde factor on a leading 2 (x) 2 pair.
inline TensorSumOperator with_qubit_prefix(const TensorSumOperator& rest, bool projector) {
    TensorSumOperator t;
    t.pairs = {PairDims{2, 2}};
    t.pairs.insert(t.pairs.end(), rest.pairs.begin(), rest.pairs.end());
    for (const auto& term : rest.terms) {
        if (projector) {
            TensorSumTerm nt;
            nt.coeff = term.coeff;
            nt.factors = {PairFactor::maxent()};
            nt.factors.insert(nt.factors.end(), term.factors.begin(), term.factors.end());
            t.terms.push_back(std::move(nt));
        } else {
            // Q2/3 = (I - P)/3
            for (int sign = 0; sign < 2; ++sign) {
                TensorSumTerm nt;
                nt.coeff = term.coeff * (sign ? Complex(-1.0 / 3) : Complex(1.0 / 3));
                nt.factors = {sign ? PairFactor::maxent() : PairFactor::identity()};
                nt.factors.insert(nt.factors.end(), term.factors.begin(),
                                  term.factors.end());
                t.terms.push_back(std::move(nt));
            }
        }
    }
    return t;
}

}  // namespace detail

// Basis for the n-pair U_iU_i^*F-invariant states (grades 0..n of P count),
// grade 0 is the leading Qtilde^n element.
inline std::vector<TensorSumOperator> primal_invariant_basis(int n, int d) {
    std::vector<TensorSumOperator> basis;
    for (int i = 0; i <= n; ++i)
        basis.push_back(detail::symmetric_grade_basis(n, d, i, /*tilde_q=*/true));
    return basis;
}

// Basis for the UU^*(V_iV_i^*F)-invariant states on a qubit pair plus n
// d-pairs: Q2-tilde grades 0..n, then P2 grades 0..n.
inline std::vector<TensorSumOperator> dual_invariant_basis(int n, int d) {
    std::vector<TensorSumOperator> basis;
    for (int i = 0; i <= n; ++i)
        basis.push_back(detail::with_qubit_prefix(
            detail::symmetric_grade_basis(n, d, i, true), false));
    for (int i = 0; i <= n; ++i)
        basis.push_back(detail::with_qubit_prefix(
            detail::symmetric_grade_basis(n, d, i, true), true));
    return basis;
}

// Coordinates (x_1..x_n) of a pure state's twirl in the primal parametrization
// (leading coefficient normalized to one).
inline CoordinateVector primal_coordinates(const Vector& v, int n, int d) {
    auto c = invariant_coordinates(v, primal_invariant_basis(n, d));
    CoordinateVector out;
    out.convention = CoordConvention::Raw;
    for (int i = 1; i <= n; ++i) {
        out.basis_labels.push_back("x" + std::to_string(i));
        out.coords.push_back(c[i] / c[0]);
    }
    return out;
}

// Coordinates (y_1..y_n, x_0..x_n) in the dual parametrization.
inline CoordinateVector dual_coordinates(const Vector& v, int n, int d) {
    auto c = invariant_coordinates(v, dual_invariant_basis(n, d));
    CoordinateVector out;
    out.convention = CoordConvention::Raw;
    for (int i = 1; i <= n; ++i) {
        out.basis_labels.push_back("y" + std::to_string(i));
        out.coords.push_back(c[i] / c[0]);
    }
    for (int i = 0; i <= n; ++i) {
        out.basis_labels.push_back("x" + std::to_string(i));
        out.coords.push_back(c[n + 1 + i] / c[0]);
    }
    return out;
}

inline CoordinateVector to_tilde(const CoordinateVector& cv, int d) {
    if (cv.convention == CoordConvention::Tilde) return cv;
    CoordinateVector out = cv;
    out.convention = CoordConvention::Tilde;
    for (std::size_t i = 0; i < out.coords.size(); ++i) {
        const std::string& lab = out.basis_labels[i];
        const int grade = std::stoi(lab.substr(1));
        out.coords[i] *= std::pow(d / 2.0 - 1.0, grade);
    }
    return out;
}

// Basis {Q(x)Q, Q(x)P + P(x)Q, P(x)P} (unnormalized Q) for the two-pair
// swap-symmetric commutant; used for the (x, y) plane of twirled vectors.
inline std::vector<TensorSumOperator> xy_invariant_basis(int d) {
    std::vector<TensorSumOperator> basis;
    for (int i = 0; i <= 2; ++i)
        basis.push_back(detail::symmetric_grade_basis(2, d, i, /*tilde_q=*/false));
    return basis;
}

// (x, y) coordinates of the twirl of a two-pair pure state, leading
// coefficient normalized to one.
inline std::pair<double, double> xy_coordinates(const Vector& v, int d) {
    auto c = invariant_coordinates(v, xy_invariant_basis(d));
    return {c[1] / c[0], c[2] / c[0]};
}

// ---- canonical vectors ---------------------------------------------------

namespace detail {

// Vector over a list of pairs in the grouped A (x) B ordering.
class KetBuilder {
   public:
    explicit KetBuilder(std::vector<PairDims> pairs)
        : pairs_(std::move(pairs)), ix_(pairs_) {
        v_ = Vector::Zero(ix_.dim_a * ix_.dim_b);
    }

    // components[k] = (a_k, b_k)
    void add(Complex amp, const std::vector<std::pair<int, int>>& components) {
        long ra = 0, rb = 0;
        for (std::size_t k = 0; k < pairs_.size(); ++k) {
            ra += components[k].first * ix_.a_strides[k];
            rb += components[k].second * ix_.b_strides[k];
        }
        v_[ra * ix_.dim_b + rb] += amp;
    }

    PureVector finish() {
        Vector v = v_ / v_.norm();
        return PureVector(static_cast<int>(ix_.dim_a), static_cast<int>(ix_.dim_b),
                          std::move(v));
    }

   private:
    std::vector<PairDims> pairs_;
    detail::PairIndexer ix_;
    Vector v_;
};

}  // namespace detail

// psi_A, psi_B, psi_C on two d-pairs.
inline PureVector canonical_abc(char kind, int d) {
    detail::KetBuilder kb({{d, d}, {d, d}});
    if (kind == 'A') {
        kb.add(1.0, {{0, 0}, {0, 0}});
        kb.add(1.0, {{0, 0}, {1, 1}});
    } else if (kind == 'B') {
        kb.add(1.0, {{0, 1}, {0, 0}});
        kb.add(1.0, {{0, 1}, {1, 1}});
    } else if (kind == 'C') {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                kb.add(1.0, {{i, j}, {i, j}});
                kb.add(1.0, {{i, j}, {(i + 1) % d, (j + 1) % d}});
            }
    } else {
        throw std::invalid_argument("canonical_abc: kind must be A, B or C");
    }
    return kb.finish();
}

// |00>^k (x) |01>^(n-k-1) (x) (|00>+|11>)/sqrt(2) on n d-pairs.
inline PureVector primal_chain_vector(int n, int k, int d) {
    if (k < 0 || k > n - 1) throw std::invalid_argument("primal_chain_vector: bad k");
    detail::KetBuilder kb(std::vector<PairDims>(n, PairDims{d, d}));
    std::vector<std::pair<int, int>> comp(n);
    for (int q = 0; q < k; ++q) comp[q] = {0, 0};
    for (int q = k; q < n - 1; ++q) comp[q] = {0, 1};
    comp[n - 1] = {0, 0};
    kb.add(1.0, comp);
    comp[n - 1] = {1, 1};
    kb.add(1.0, comp);
    return kb.finish();
}

// |01>_2 |00>^k |01>^(n-k) on the qubit pair plus n d-pairs.
inline PureVector dual_chain_q_vector(int n, int k, int d) {
    if (k < 0 || k > n) throw std::invalid_argument("dual_chain_q_vector: bad k");
    std::vector<PairDims> pairs{PairDims{2, 2}};
    pairs.insert(pairs.end(), n, PairDims{d, d});
    detail::KetBuilder kb(pairs);
    std::vector<std::pair<int, int>> comp(n + 1);
    comp[0] = {0, 1};
    for (int q = 1; q <= k; ++q) comp[q] = {0, 0};
    for (int q = k + 1; q <= n; ++q) comp[q] = {0, 1};
    kb.add(1.0, comp);
    return kb.finish();
}

// sum_{i,j in {0,1}} |ij>_2 |ij> |00>^(n-k-1) |01>^k.
inline PureVector dual_chain_x_vector(int n, int k, int d) {
    if (k < 0 || k > n - 1) throw std::invalid_argument("dual_chain_x_vector: bad k");
    std::vector<PairDims> pairs{PairDims{2, 2}};
    pairs.insert(pairs.end(), n, PairDims{d, d});
    detail::KetBuilder kb(pairs);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            std::vector<std::pair<int, int>> comp(n + 1);
            comp[0] = {i, j};
            comp[1] = {i, j};
            for (int q = 2; q <= n - k; ++q) comp[q] = {0, 0};
            for (int q = n - k + 1; q <= n; ++q) comp[q] = {0, 1};
            kb.add(1.0, comp);
        }
    return kb.finish();
}

// The two appendix vectors on the m-pair (x) d-pair rainbow spaces.
inline PureVector rainbow_vector(int which, int m, int d) {
    detail::KetBuilder kb({{m, m}, {d, d}});
    if (which == 1) {
        // (|00> + |11>)_d (x) |00>_m
        kb.add(1.0, {{0, 0}, {0, 0}});
        kb.add(1.0, {{0, 0}, {1, 1}});
    } else if (which == 2) {
        // (|00> + |11>)_d (x) |01>_m
        kb.add(1.0, {{0, 1}, {0, 0}});
        kb.add(1.0, {{0, 1}, {1, 1}});
    } else {
        throw std::invalid_argument("rainbow_vector: which must be 1 or 2");
    }
    return kb.finish();
}

}  // namespace distilkit
