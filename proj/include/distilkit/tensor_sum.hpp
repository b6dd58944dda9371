// Structured operators: linear combinations of tensor products of pair
// operators (identity, swap, maximally entangled projector) over a list of
// d (x) d pairs. This is the sparse form that keeps multi-copy searches
// tractable when the dense operator no longer fits.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "distilkit/linalg.hpp"

namespace distilkit {

// Largest total dimension for which dense expansion is permitted.
constexpr int kDenseBudget = 4096;

enum class FactorKind { Identity, Swap, MaxEntProj, Dense };

// One per-pair factor, scale * kind. Swap is F, MaxEntProj is P.
struct PairFactor {
    FactorKind kind = FactorKind::Identity;
    Complex scale = 1.0;
    Matrix dense;  // used only for FactorKind::Dense

    static PairFactor identity(Complex s = 1.0) { return {FactorKind::Identity, s, {}}; }
    static PairFactor swap(Complex s = 1.0) { return {FactorKind::Swap, s, {}}; }
    static PairFactor maxent(Complex s = 1.0) { return {FactorKind::MaxEntProj, s, {}}; }
    static PairFactor from_dense(Matrix m) { return {FactorKind::Dense, 1.0, std::move(m)}; }
};

struct PairDims {
    int dim_a = 2;
    int dim_b = 2;
    int dim() const { return dim_a * dim_b; }
};

struct TensorSumTerm {
    Complex coeff = 1.0;
    std::vector<PairFactor> factors;  // one per pair
};

inline Matrix factor_matrix(const PairFactor& f, const PairDims& p) {
    switch (f.kind) {
        case FactorKind::Identity:
            return f.scale * Matrix::Identity(p.dim(), p.dim());
        case FactorKind::Swap: {
            if (p.dim_a != p.dim_b)
                throw std::invalid_argument("swap factor needs dim_a == dim_b");
            return f.scale * flip_operator(p.dim_a);
        }
        case FactorKind::MaxEntProj: {
            if (p.dim_a != p.dim_b)
                throw std::invalid_argument("maxent factor needs dim_a == dim_b");
            return f.scale * me_projector(p.dim_a);
        }
        case FactorKind::Dense:
            return f.scale * f.dense;
    }
    throw std::logic_error("unreachable");
}

class TensorSumOperator {
   public:
    std::vector<PairDims> pairs;
    std::vector<TensorSumTerm> terms;
    double normalization = 1.0;  // trace factor; dense() divides by it

    int dim_a() const {
        int d = 1;
        for (auto& p : pairs) d *= p.dim_a;
        return d;
    }
    int dim_b() const {
        int d = 1;
        for (auto& p : pairs) d *= p.dim_b;
        return d;
    }
    long total_dim() const { return static_cast<long>(dim_a()) * dim_b(); }

    void check_shape() const {
        for (auto& t : terms)
            if (t.factors.size() != pairs.size())
                throw std::invalid_argument("term factor count != pair count");
    }

    // Partial transpose acts pair-by-pair: I -> I, F -> d P, P -> F/d.
    TensorSumOperator partial_transpose() const {
        TensorSumOperator out = *this;
        for (auto& t : out.terms) {
            for (std::size_t k = 0; k < t.factors.size(); ++k) {
                PairFactor& f = t.factors[k];
                const int d = pairs[k].dim_a;
                switch (f.kind) {
                    case FactorKind::Identity:
                        break;
                    case FactorKind::Swap:
                        f.kind = FactorKind::MaxEntProj;
                        f.scale *= static_cast<double>(d);
                        break;
                    case FactorKind::MaxEntProj:
                        f.kind = FactorKind::Swap;
                        f.scale /= static_cast<double>(d);
                        break;
                    case FactorKind::Dense:
                        f.dense = distilkit::partial_transpose(f.dense, pairs[k].dim_a,
                                                               pairs[k].dim_b);
                        break;
                }
            }
        }
        return out;
    }

    // n-fold tensor power; pairs are concatenated copy by copy.
    TensorSumOperator tensor_power(int n) const {
        if (n < 1) throw std::invalid_argument("tensor_power: n must be >= 1");
        TensorSumOperator out;
        out.normalization = 1.0;
        for (int c = 0; c < n; ++c) out.normalization *= normalization;
        for (int c = 0; c < n; ++c)
            out.pairs.insert(out.pairs.end(), pairs.begin(), pairs.end());
        std::vector<TensorSumTerm> acc = {TensorSumTerm{1.0, {}}};
        for (int c = 0; c < n; ++c) {
            std::vector<TensorSumTerm> next;
            next.reserve(acc.size() * terms.size());
            for (const auto& partial : acc)
                for (const auto& t : terms) {
                    TensorSumTerm nt;
                    nt.coeff = partial.coeff * t.coeff;
                    nt.factors = partial.factors;
                    nt.factors.insert(nt.factors.end(), t.factors.begin(), t.factors.end());
                    next.push_back(std::move(nt));
                }
            acc = std::move(next);
        }
        out.terms = std::move(acc);
        return out;
    }

    // Dense expansion in the grouped A (x) B ordering: the row index is
    // (a_1..a_m, b_1..b_m) mixed-radix with a-components slowest.
    DenseOperator dense(bool normalize = true) const;

    double trace() const {
        double tr = 0.0;
        for (const auto& t : terms) {
            Complex prod = t.coeff;
            for (std::size_t k = 0; k < t.factors.size(); ++k) {
                const auto& f = t.factors[k];
                const int d = pairs[k].dim_a;
                switch (f.kind) {
                    case FactorKind::Identity:
                        prod *= f.scale * static_cast<double>(pairs[k].dim());
                        break;
                    case FactorKind::Swap:
                        prod *= f.scale * static_cast<double>(d);
                        break;
                    case FactorKind::MaxEntProj:
                        prod *= f.scale;
                        break;
                    case FactorKind::Dense:
                        prod *= f.scale * f.dense.trace();
                        break;
                }
            }
            tr += prod.real();
        }
        return tr;
    }
};

namespace detail {

// Index strides for the grouped ordering.
struct PairIndexer {
    std::vector<int> a_dims, b_dims;
    std::vector<long> a_strides, b_strides;
    long dim_a = 1, dim_b = 1;

    explicit PairIndexer(const std::vector<PairDims>& pairs) {
        const int m = static_cast<int>(pairs.size());
        a_dims.resize(m);
        b_dims.resize(m);
        a_strides.resize(m);
        b_strides.resize(m);
        for (int k = 0; k < m; ++k) {
            a_dims[k] = pairs[k].dim_a;
            b_dims[k] = pairs[k].dim_b;
        }
        long s = 1;
        for (int k = m - 1; k >= 0; --k) {
            a_strides[k] = s;
            s *= a_dims[k];
        }
        dim_a = s;
        s = 1;
        for (int k = m - 1; k >= 0; --k) {
            b_strides[k] = s;
            s *= b_dims[k];
        }
        dim_b = s;
    }
};

}  // namespace detail

inline DenseOperator TensorSumOperator::dense(bool normalize) const {
    check_shape();
    if (total_dim() > kDenseBudget)
        throw std::invalid_argument("dense expansion exceeds the dimension budget");
    const int m = static_cast<int>(pairs.size());
    detail::PairIndexer ix(pairs);
    const long da = ix.dim_a, db = ix.dim_b, n = da * db;

    Matrix out = Matrix::Zero(n, n);
    std::vector<Matrix> fm(m);
    std::vector<int> ai(m), bi(m), aj(m), bj(m);
    for (const auto& t : terms) {
        for (int k = 0; k < m; ++k) fm[k] = factor_matrix(t.factors[k], pairs[k]);
        for (long r = 0; r < n; ++r) {
            long ra = r / db, rb = r % db;
            for (int k = 0; k < m; ++k) {
                ai[k] = static_cast<int>(ra / ix.a_strides[k] % ix.a_dims[k]);
                bi[k] = static_cast<int>(rb / ix.b_strides[k] % ix.b_dims[k]);
            }
            for (long c = 0; c < n; ++c) {
                long ca = c / db, cb = c % db;
                Complex prod = t.coeff;
                for (int k = 0; k < m && prod != Complex(0.0); ++k) {
                    aj[k] = static_cast<int>(ca / ix.a_strides[k] % ix.a_dims[k]);
                    bj[k] = static_cast<int>(cb / ix.b_strides[k] % ix.b_dims[k]);
                    prod *= fm[k](ai[k] * ix.b_dims[k] + bi[k], aj[k] * ix.b_dims[k] + bj[k]);
                }
                out(r, c) += prod;
            }
        }
    }
    if (normalize) out /= normalization;
    double dev = (out - out.adjoint()).cwiseAbs().maxCoeff();
    return DenseOperator(static_cast<int>(da), static_cast<int>(db), std::move(out),
                         dev <= 1e-12);
}

namespace detail {

// Applies one pair factor in place to a vector in the grouped ordering.
inline void apply_factor_inplace(Vector& v, const detail::PairIndexer& ix, int k,
                                 const PairFactor& f) {
    if (f.kind == FactorKind::Identity) {
        if (f.scale != Complex(1.0)) v *= f.scale;
        return;
    }
    const int pa = ix.a_dims[k], pb = ix.b_dims[k];
    const long sa = ix.a_strides[k], sb = ix.b_strides[k];
    const long da = ix.dim_a, db = ix.dim_b;
    Matrix fm;
    if (f.kind == FactorKind::Dense) fm = f.scale * f.dense;
    Vector fiber(pa * pb);
    for (long ra = 0; ra < da; ++ra) {
        if ((ra / sa) % pa != 0) continue;  // enumerate fibers at component 0
        for (long rb = 0; rb < db; ++rb) {
            if ((rb / sb) % pb != 0) continue;
            for (int x = 0; x < pa; ++x)
                for (int y = 0; y < pb; ++y)
                    fiber[x * pb + y] = v[(ra + x * sa) * db + rb + y * sb];
            switch (f.kind) {
                case FactorKind::Swap: {
                    Vector tmp(pa * pb);
                    for (int x = 0; x < pa; ++x)
                        for (int y = 0; y < pb; ++y) tmp[x * pb + y] = fiber[y * pb + x];
                    fiber = f.scale * tmp;
                    break;
                }
                case FactorKind::MaxEntProj: {
                    Complex s = 0.0;
                    for (int x = 0; x < pa; ++x) s += fiber[x * pb + x];
                    s *= f.scale / static_cast<double>(pa);
                    fiber.setZero();
                    for (int x = 0; x < pa; ++x) fiber[x * pb + x] = s;
                    break;
                }
                case FactorKind::Dense:
                    fiber = fm * fiber;
                    break;
                default:
                    break;
            }
            for (int x = 0; x < pa; ++x)
                for (int y = 0; y < pb; ++y)
                    v[(ra + x * sa) * db + rb + y * sb] = fiber[x * pb + y];
        }
    }
}

}  // namespace detail

// T|v> for a vector in the grouped A (x) B ordering (includes normalization).
inline Vector apply(const TensorSumOperator& t, const Vector& v) {
    t.check_shape();
    detail::PairIndexer ix(t.pairs);
    if (v.size() != t.total_dim())
        throw std::invalid_argument("apply: vector dimension mismatch");
    Vector out = Vector::Zero(v.size());
    const int m = static_cast<int>(t.pairs.size());
    for (const auto& term : t.terms) {
        Vector w = v;
        for (int k = 0; k < m; ++k) detail::apply_factor_inplace(w, ix, k, term.factors[k]);
        out += term.coeff * w;
    }
    return out / t.normalization;
}

namespace detail {

inline Complex pair_trace_product(const PairFactor& x, const PairFactor& y,
                                  const PairDims& p) {
    // Tr(X^dag Y) for pair factors.
    auto kindpair = [&](FactorKind a, FactorKind b) {
        return a == x.kind && b == y.kind;
    };
    const double d = p.dim_a;
    Complex s = std::conj(x.scale) * y.scale;
    using K = FactorKind;
    if (x.kind == K::Dense || y.kind == K::Dense) {
        Matrix mx = factor_matrix(x, p), my = factor_matrix(y, p);
        return (mx.adjoint() * my).trace();
    }
    if (kindpair(K::Identity, K::Identity)) return s * d * d;
    if (kindpair(K::Swap, K::Swap)) return s * d * d;      // F^2 = I
    if (kindpair(K::MaxEntProj, K::MaxEntProj)) return s;  // P^2 = P
    if (kindpair(K::Identity, K::Swap) || kindpair(K::Swap, K::Identity)) return s * d;
    if (kindpair(K::Identity, K::MaxEntProj) || kindpair(K::MaxEntProj, K::Identity))
        return s;
    // Tr(FP) = Tr(PF) = Tr(P) = 1
    return s;
}

}  // namespace detail

// Hilbert-Schmidt inner product Tr(T1^dag T2), exact in the pair structure.
inline Complex hs_inner(const TensorSumOperator& t1, const TensorSumOperator& t2) {
    if (t1.pairs.size() != t2.pairs.size())
        throw std::invalid_argument("hs_inner: pair structure mismatch");
    Complex acc = 0.0;
    for (const auto& a : t1.terms)
        for (const auto& b : t2.terms) {
            Complex prod = std::conj(a.coeff) * b.coeff;
            for (std::size_t k = 0; k < t1.pairs.size(); ++k)
                prod *= detail::pair_trace_product(a.factors[k], b.factors[k], t1.pairs[k]);
            acc += prod;
        }
    return acc / (t1.normalization * t2.normalization);
}

// (I (x) P) T (I (x) P)^dag for P = |0><a| + |1><b|, without densifying T.
// Output row index is i*2 + s with i the composite A index and s in {0,1}.
//
// Fast path requires every factor to be Identity or MaxEntProj (the shape of
// every partially transposed state in this library). A term with the
// projector on pair subset S contributes, after contracting the B legs,
// gamma * [i = j off S] * G[i_S, j_S] where G is a partial Gram matrix of
// the candidate vectors over the complement of S.
Matrix contract_b_pair(const TensorSumOperator& t, const SearchCandidate& cand);

namespace detail {

inline bool fast_contractible(const TensorSumOperator& t) {
    for (const auto& term : t.terms)
        for (const auto& f : term.factors)
            if (f.kind != FactorKind::Identity && f.kind != FactorKind::MaxEntProj)
                return false;
    return true;
}

}  // namespace detail

inline Matrix contract_b_pair(const TensorSumOperator& t, const SearchCandidate& cand) {
    t.check_shape();
    const int m = static_cast<int>(t.pairs.size());
    detail::PairIndexer ix(t.pairs);
    if (cand.b_dim != ix.dim_b)
        throw std::invalid_argument("contract_b_pair: candidate dimension mismatch");
    const long da = ix.dim_a;

    if (!detail::fast_contractible(t)) {
        if (t.total_dim() > kDenseBudget)
            throw std::invalid_argument(
                "contract_b_pair: operator is neither fast-contractible nor small "
                "enough for dense fallback");
        DenseOperator d = t.dense(false);
        Matrix p = Matrix::Zero(2, ix.dim_b);
        p.row(0) = cand.a.adjoint();
        p.row(1) = cand.b.adjoint();
        Matrix ip = kron(Matrix::Identity(da, da), p);
        Matrix out = (ip * d.mat * ip.adjoint()) / t.normalization;
        return out;
    }

    // Group terms by the projector subset; gamma already includes the 1/p
    // from each projector's matrix elements.
    struct MaskEntry {
        std::uint32_t mask;
        Complex gamma;
    };
    std::vector<MaskEntry> entries;
    for (const auto& term : t.terms) {
        std::uint32_t mask = 0;
        Complex gamma = term.coeff;
        for (int k = 0; k < m; ++k) {
            const auto& f = term.factors[k];
            gamma *= f.scale;
            if (f.kind == FactorKind::MaxEntProj) {
                mask |= (1u << k);
                gamma /= static_cast<double>(t.pairs[k].dim_a);
            }
        }
        bool merged = false;
        for (auto& e : entries)
            if (e.mask == mask) {
                e.gamma += gamma;
                merged = true;
                break;
            }
        if (!merged) entries.push_back({mask, gamma});
    }

    Matrix out = Matrix::Zero(2 * da, 2 * da);
    const Vector* uu[2] = {&cand.a, &cand.b};

    std::vector<int> in_s, off_s;
    for (const auto& e : entries) {
        in_s.clear();
        off_s.clear();
        for (int k = 0; k < m; ++k)
            ((e.mask >> k) & 1u ? in_s : off_s).push_back(k);
        long ps = 1, pc = 1;  // sizes of the S part and its complement
        for (int k : in_s) ps *= ix.b_dims[k];
        for (int k : off_s) pc *= ix.b_dims[k];

        // B index decomposed as (x over S, f over complement); the same
        // component values index the A side on S (projector forces a = b).
        std::vector<long> bidx(static_cast<std::size_t>(ps) * pc);
        std::vector<long> aidx_s(ps);     // A-stride contribution of the S part
        std::vector<long> aidx_off(pc);   // A-stride contribution of the rest
        for (long x = 0; x < ps; ++x) {
            long rem = x, bpart = 0, apart = 0;
            for (std::size_t q = in_s.size(); q-- > 0;) {
                int k = in_s[q];
                int comp = static_cast<int>(rem % ix.b_dims[k]);
                rem /= ix.b_dims[k];
                bpart += comp * ix.b_strides[k];
                apart += comp * ix.a_strides[k];
            }
            aidx_s[x] = apart;
            for (long f = 0; f < pc; ++f) {
                long remf = f, bf = 0;
                for (std::size_t q = off_s.size(); q-- > 0;) {
                    int k = off_s[q];
                    int comp = static_cast<int>(remf % ix.b_dims[k]);
                    remf /= ix.b_dims[k];
                    bf += comp * ix.b_strides[k];
                }
                bidx[x * pc + f] = bpart + bf;
            }
        }
        for (long h = 0; h < pc; ++h) {
            long remh = h, apart = 0;
            for (std::size_t q = off_s.size(); q-- > 0;) {
                int k = off_s[q];
                int comp = static_cast<int>(remh % ix.a_dims[k]);
                remh /= ix.a_dims[k];
                apart += comp * ix.a_strides[k];
            }
            aidx_off[h] = apart;
        }

        // Partial Gram G^{st}[x, y] = sum_f conj(u_s[b(x,f)]) u_t[b(y,f)].
        Matrix us(ps, pc), ub(ps, pc);
        for (long x = 0; x < ps; ++x)
            for (long f = 0; f < pc; ++f) {
                us(x, f) = (*uu[0])[bidx[x * pc + f]];
                ub(x, f) = (*uu[1])[bidx[x * pc + f]];
            }
        std::array<Matrix, 4> g;  // (s,t) -> s*2+t
        const Matrix* um[2] = {&us, &ub};
        for (int s = 0; s < 2; ++s)
            for (int tt = 0; tt < 2; ++tt)
                g[s * 2 + tt] = um[s]->conjugate() * um[tt]->transpose();

        for (long x = 0; x < ps; ++x)
            for (long y = 0; y < ps; ++y) {
                const Complex g00 = e.gamma * g[0](x, y);
                const Complex g01 = e.gamma * g[1](x, y);
                const Complex g10 = e.gamma * g[2](x, y);
                const Complex g11 = e.gamma * g[3](x, y);
                for (long h = 0; h < pc; ++h) {
                    const long i = aidx_s[x] + aidx_off[h];
                    const long j = aidx_s[y] + aidx_off[h];
                    out(i * 2 + 0, j * 2 + 0) += g00;
                    out(i * 2 + 0, j * 2 + 1) += g01;
                    out(i * 2 + 1, j * 2 + 0) += g10;
                    out(i * 2 + 1, j * 2 + 1) += g11;
                }
            }
    }
    return out / t.normalization;
}

}  // namespace distilkit
