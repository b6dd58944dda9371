// Two-copy distillation recursion maps, the numerical projection oracle that
// validates them, and protocol iteration to a distillability verdict.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distilkit/criteria.hpp"
#include "distilkit/families.hpp"
#include "distilkit/tensor_sum.hpp"

namespace distilkit {

// epsilon' and delta' after projecting two copies onto the maximally
// entangled pair of projectors; input validity is enforced.
inline std::pair<double, double> uuvvf_step(int d, double eps, double delta) {
    (void)uuvvf(d, eps, delta);
    return uuvvf_step_map(d, eps, delta);
}

// Watrous special case of the same map (delta determined by epsilon).
inline double watrous_step(int d, double eps) {
    (void)watrous(d, eps);
    const double dd = static_cast<double>(d) * d;
    return eps * 2 * (eps * d + dd - 1) / (dd * eps * eps + dd - 1);
}

// The three projector/swap overlap values used by the recursion derivation:
// Tr((P15 (x) P26)(I (x) F)), Tr((P15 (x) P26)(F (x) I)), Tr((P15 (x) P26)(F (x) F)).
inline std::array<double, 3> projection_trace_identities(int d) {
    auto ops = elementary_operators(d);
    // Tr((P15 (x) P26)(X12 (x) Z56)) = (1/d^2) sum_rc X(r,c) Z(r,c)
    auto lam = [&](const Matrix& x, const Matrix& z) {
        return (x.cwiseProduct(z)).sum().real() / (static_cast<double>(d) * d);
    };
    return {lam(ops.identity, ops.flip), lam(ops.flip, ops.identity),
            lam(ops.flip, ops.flip)};
}

struct ProjectedFamily {
    int dim = 0;  // dimension of the surviving pair
    double eps = 0.0;
    double delta = 0.0;
};

// Numerically projects two copies of a two-pair structured state onto the
// maximally entangled projectors across the `projected_pair` slots of both
// copies, then re-extracts (eps', delta') from the {I,F} (x) {I,F} expansion
// of the surviving pairs. Used as the brute-force oracle for the closed-form
// recursion maps.
inline ProjectedFamily oracle_project_two_copies(const FamilyState& s,
                                                 int projected_pair = -1) {
    if (s.tag == FamilyTag::Werner || s.tag == FamilyTag::Isotropic)
        throw std::invalid_argument(
            "oracle_project_two_copies: need a two-pair family");
    if (projected_pair < 0) projected_pair = (s.tag == FamilyTag::Rainbow) ? 1 : 0;
    if (projected_pair > 1)
        throw std::invalid_argument("oracle_project_two_copies: bad pair index");

    TensorSumOperator t = structured(s);
    const int keep_pair = 1 - projected_pair;
    const int p = t.pairs[projected_pair].dim_a;
    const int k = t.pairs[keep_pair].dim_a;

    // lam(X, Z) = Tr((P (x) P)(X12 (x) Z56)) = (1/p^2) sum_rc X(r,c) Z(r,c)
    auto lam = [&](const PairFactor& fx, const PairFactor& fz) {
        Matrix x = factor_matrix(fx, t.pairs[projected_pair]);
        Matrix z = factor_matrix(fz, t.pairs[projected_pair]);
        return (x.cwiseProduct(z)).sum() / (static_cast<double>(p) * p);
    };

    // assemble the projected operator on the two surviving pairs
    TensorSumOperator out;
    out.pairs = {t.pairs[keep_pair], t.pairs[keep_pair]};
    for (const auto& ts : t.terms)
        for (const auto& tt : t.terms) {
            TensorSumTerm term;
            term.coeff = ts.coeff * tt.coeff *
                         lam(ts.factors[projected_pair], tt.factors[projected_pair]);
            term.factors = {ts.factors[keep_pair], tt.factors[keep_pair]};
            out.terms.push_back(std::move(term));
        }

    // coordinates in the {I,F} (x) {I,F} basis via the Gram solve
    std::vector<TensorSumOperator> basis;
    using PF = PairFactor;
    for (auto [f1, f2] : std::vector<std::pair<PF, PF>>{
             {PF::identity(), PF::identity()},
             {PF::identity(), PF::swap()},
             {PF::swap(), PF::identity()},
             {PF::swap(), PF::swap()}}) {
        TensorSumOperator b;
        b.pairs = out.pairs;
        b.terms = {{1.0, {f1, f2}}};
        basis.push_back(std::move(b));
    }
    std::vector<Complex> t_vec;
    for (const auto& b : basis) t_vec.push_back(hs_inner(b, out));
    auto c = invariant_coordinates(t_vec, basis);

    const double c_if = c[1] / c[0], c_fi = c[2] / c[0], c_ff = c[3] / c[0];
    if (std::abs(c_if - c_fi) > 1e-9)
        throw std::runtime_error(
            "oracle_project_two_copies: asymmetric projection output");
    ProjectedFamily out_params;
    out_params.dim = k;
    out_params.eps = c_if + 1.0 / k;  // c_if = (eps k - 1)/k
    out_params.delta =
        (c_ff * k * k - 1 + 2 * out_params.eps * k) / (static_cast<double>(k) * k);
    return out_params;
}

// Distills two rainbow copies by projecting across the d pairs; the result is
// a dim-m two-pair invariant state whose parameters follow the same closed
// forms evaluated at d. Projecting across the m pairs instead performs worse
// and is available only through the oracle above.
inline std::pair<double, double> rainbow_step(int m, int d, double eps,
                                              double delta) {
    (void)rainbow(m, d, eps, delta);
    return uuvvf_step_map(d, eps, delta);
}

enum class ProtocolVerdict { DistillableAfter, Inconclusive };

struct ProtocolTrace {
    std::vector<std::pair<double, double>> steps;  // (eps, delta) per iteration
    ProtocolVerdict verdict = ProtocolVerdict::Inconclusive;
    int distillable_after = -1;  // set when verdict is DistillableAfter
    int dim = 0;                 // dimension the recursion runs in
};

inline bool one_distillable_point(int d, double eps, double delta) {
    auto c = uuvvf_one_dist_certs(d, eps, delta);
    return c[0] < -kStrictTol || c[1] < -kStrictTol || c[2] < -kStrictTol;
}

inline ProtocolTrace iterate_protocol(const FamilyState& s, int max_iters = 64) {
    if (max_iters < 1) throw std::invalid_argument("iterate_protocol: max_iters < 1");
    ProtocolTrace trace;
    double eps, delta;
    int dim;
    switch (s.tag) {
        case FamilyTag::Uuvvf:
        case FamilyTag::Watrous:
            dim = s.d;
            eps = s.epsilon();
            delta = s.delta();
            break;
        case FamilyTag::Werner:
            // two Werner copies: the per-pair flip coefficient of
            // (I + beta F)^{(x)2} is beta, so (eps d - 1)/d = beta and
            // delta = eps^2 (the recursion fixed line)
            dim = s.d;
            eps = s.beta() + 1.0 / s.d;
            delta = eps * eps;
            break;
        case FamilyTag::Rainbow: {
            auto [e2, d2] = rainbow_step(s.m, s.d, s.epsilon(), s.delta());
            dim = s.m;
            eps = e2;
            delta = d2;
            trace.steps.emplace_back(s.epsilon(), s.delta());
            break;
        }
        default:
            throw std::invalid_argument("iterate_protocol: unsupported family");
    }
    trace.dim = dim;
    trace.steps.emplace_back(eps, delta);
    for (int k = 1; k <= max_iters; ++k) {
        if (one_distillable_point(dim, eps, delta)) {
            trace.verdict = ProtocolVerdict::DistillableAfter;
            trace.distillable_after = static_cast<int>(trace.steps.size()) - 1;
            return trace;
        }
        auto [e2, d2] = uuvvf_step_map(dim, eps, delta);
        if (std::abs(e2 - eps) < 1e-14 && std::abs(d2 - delta) < 1e-14) {
            trace.steps.emplace_back(e2, d2);
            return trace;  // fixed point: inconclusive
        }
        eps = e2;
        delta = d2;
        trace.steps.emplace_back(eps, delta);
    }
    if (one_distillable_point(dim, eps, delta)) {
        trace.verdict = ProtocolVerdict::DistillableAfter;
        trace.distillable_after = static_cast<int>(trace.steps.size()) - 1;
    }
    return trace;
}

}  // namespace distilkit
