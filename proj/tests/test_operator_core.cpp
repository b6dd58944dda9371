#include <catch2/catch_amalgamated.hpp>

#include "distilkit/linalg.hpp"
#include "distilkit/rng.hpp"
#include "distilkit/tensor_sum.hpp"

using namespace distilkit;

namespace {

Matrix random_hermitian(int n, Rng& rng) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.gaussian_complex();
    return Matrix((a + a.adjoint()).eval() / 2.0);
}

}  // namespace

TEST_CASE("kron basics") {
    Matrix i2 = Matrix::Identity(2, 2);
    REQUIRE((kron(i2, i2) - Matrix::Identity(4, 4)).norm() == 0.0);

    Matrix d1 = Matrix::Zero(2, 2), d2 = Matrix::Zero(2, 2);
    d1.diagonal() << 1, 2;
    d2.diagonal() << 3, 4;
    Matrix expect = Matrix::Zero(4, 4);
    expect.diagonal() << 3, 4, 6, 8;
    REQUIRE((kron(d1, d2) - expect).norm() == 0.0);
}

TEST_CASE("kron of swaps permutes basis kets") {
    // (F (x) F)|0110> = |1001>: each swap exchanges its own qubit pair
    Matrix f = flip_operator(2);
    Matrix ff = kron(f, f);
    Vector v = Vector::Zero(16);
    v[0b0110] = 1.0;
    Vector w = ff * v;
    REQUIRE(std::abs(w[0b1001] - 1.0) < 1e-15);
    REQUIRE(w.norm() == Catch::Approx(1.0));
}

TEST_CASE("partial transpose") {
    Rng rng(11);
    Matrix a = random_hermitian(2, rng), b = random_hermitian(2, rng);
    REQUIRE((partial_transpose(kron(a, b), 2, 2) - kron(a, b.transpose().eval()))
                .norm() < 1e-14);

    for (int d = 2; d <= 5; ++d) {
        REQUIRE((partial_transpose(me_projector(d), d, d) - flip_operator(d) / d)
                    .norm() < 1e-13);
    }

    Matrix x = random_hermitian(9, rng);
    REQUIRE((partial_transpose(partial_transpose(x, 3, 3), 3, 3) - x).norm() == 0.0);
}

TEST_CASE("partial transpose is a trace/hermiticity preserving involution") {
    Rng rng(12);
    for (int rep = 0; rep < 100; ++rep) {
        Matrix x = random_hermitian(9, rng);
        Matrix y = partial_transpose(x, 3, 3);
        REQUIRE(std::abs((y.trace() - x.trace()).real()) < 1e-12);
        REQUIRE((y - y.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE((partial_transpose(y, 3, 3) - x).norm() < 1e-12);
    }
}

TEST_CASE("min_eigenvalue") {
    REQUIRE(min_eigenvalue(Matrix::Identity(4, 4)) == Catch::Approx(1.0));
    REQUIRE(min_eigenvalue(flip_operator(2)) == Catch::Approx(-1.0));

    const int d = 3;
    const double beta = -1.0;
    Matrix w = Matrix::Identity(d * d, d * d) + beta * flip_operator(d);
    REQUIRE(min_eigenvalue(partial_transpose(w, d, d)) ==
            Catch::Approx(1 + beta * d).margin(1e-10));
}

TEST_CASE("min_eigenvalue is unitarily invariant") {
    Rng rng(13);
    Matrix h = random_hermitian(8, rng);
    for (int rep = 0; rep < 5; ++rep) {
        Matrix u = haar_unitary(8, rng);
        REQUIRE(min_eigenvalue(Matrix(u * h * u.adjoint())) ==
                Catch::Approx(min_eigenvalue(h)).margin(1e-9));
    }
}

TEST_CASE("elementary operators") {
    REQUIRE_THROWS_AS(elementary_operators(1), std::invalid_argument);
    {
        auto ops = elementary_operators(2);
        Vector v = Vector::Zero(4);
        v[0 * 2 + 1] = 1.0;  // |01>
        Vector w = ops.flip * v;
        REQUIRE(std::abs(w[1 * 2 + 0] - 1.0) < 1e-15);
    }
    for (int d : {2, 3, 4}) {
        auto ops = elementary_operators(d);
        REQUIRE(std::abs(ops.me_proj.trace().real() - 1.0) < 1e-14);
        REQUIRE(std::abs(ops.flip.trace().real() - d) < 1e-14);
        REQUIRE((ops.flip * ops.flip - ops.identity).cwiseAbs().maxCoeff() < 1e-14);
        REQUIRE((ops.me_proj * ops.me_proj - ops.me_proj).cwiseAbs().maxCoeff() <
                1e-14);
        REQUIRE((ops.me_proj * ops.complement).cwiseAbs().maxCoeff() < 1e-14);
        REQUIRE((ops.flip * ops.me_proj - ops.me_proj).cwiseAbs().maxCoeff() < 1e-14);
        REQUIRE((partial_transpose(ops.me_proj, d, d) - ops.flip / d)
                    .cwiseAbs()
                    .maxCoeff() < 1e-14);
    }
}

TEST_CASE("haar_unitary unitarity and moments") {
    Rng rng(14);
    for (int d : {1, 2, 5}) {
        Matrix u = haar_unitary(d, rng);
        REQUIRE((u.adjoint() * u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <
                1e-12);
    }
    // E|u_00|^2 = 1/d, sampled
    const int d = 4, n = 10000;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        Matrix u = haar_unitary(d, rng);
        acc += std::norm(u(0, 0));
    }
    REQUIRE(std::abs(acc / n - 0.25) < 0.01);
}

TEST_CASE("simplex_point") {
    Rng rng(15);
    auto one = simplex_point(1, rng);
    REQUIRE(one.size() == 1);
    REQUIRE(one[0] == Catch::Approx(1.0));

    for (int rep = 0; rep < 50; ++rep) {
        auto p = simplex_point(7, rng);
        double s = 0;
        for (double x : p) {
            REQUIRE(x >= 0.0);
            s += x;
        }
        REQUIRE(std::abs(s - 1.0) < 1e-12);
    }
    const int n = 10000;
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += simplex_point(9, rng)[0];
    REQUIRE(std::abs(acc / n - 1.0 / 9) < 0.01);
}

TEST_CASE("schmidt_rank") {
    {
        Vector v = Vector::Zero(4);
        v[0] = 1.0;  // |00>
        REQUIRE(schmidt_rank(PureVector(2, 2, v)) == 1);
    }
    {
        Vector v = Vector::Zero(4);
        v[0] = v[3] = 1.0 / std::sqrt(2.0);
        REQUIRE(schmidt_rank(PureVector(2, 2, v)) == 2);
    }
}

TEST_CASE("rng substreams are deterministic and decorrelated") {
    Rng a = Rng::substream(42, 7, 3);
    Rng b = Rng::substream(42, 7, 3);
    for (int i = 0; i < 16; ++i) REQUIRE(a.raw() == b.raw());
    Rng c = Rng::substream(42, 7, 4);
    bool differs = false;
    for (int i = 0; i < 16; ++i) differs |= (Rng::substream(42, 7, 3).raw() != c.raw());
    REQUIRE(differs);
}

TEST_CASE("tensor sum dense expansion, trace, and partial transpose") {
    const int d = 3;
    Rng rng(21);
    // rho = I + beta F as a one-pair tensor sum
    const double beta = -0.7;
    TensorSumOperator t;
    t.pairs = {{d, d}};
    t.terms = {{1.0, {PairFactor::identity()}}, {beta, {PairFactor::swap()}}};
    REQUIRE(std::abs(t.trace() - (d * d + beta * d)) < 1e-12);

    Matrix dense_ref = Matrix::Identity(d * d, d * d) + beta * flip_operator(d);
    DenseOperator got = t.dense(false);
    REQUIRE((got.mat - dense_ref).cwiseAbs().maxCoeff() < 1e-12);

    DenseOperator pt = t.partial_transpose().dense(false);
    REQUIRE((pt.mat - partial_transpose(dense_ref, d, d)).cwiseAbs().maxCoeff() <
            1e-12);
}

TEST_CASE("tensor power and structured apply agree with dense") {
    const int d = 2;
    TensorSumOperator t;
    t.pairs = {{d, d}};
    t.terms = {{1.0, {PairFactor::identity()}}, {-0.5, {PairFactor::maxent()}}};
    TensorSumOperator t2 = t.tensor_power(2);
    DenseOperator dense2 = t2.dense(false);
    REQUIRE(dense2.mat.rows() == 16);

    Rng rng(22);
    for (int rep = 0; rep < 10; ++rep) {
        Vector v(16);
        for (int i = 0; i < 16; ++i) v[i] = rng.gaussian_complex();
        Vector via_structured = distilkit::apply(t2, v);
        Vector via_dense = dense2.mat * v;
        REQUIRE((via_structured - via_dense).norm() < 1e-12 * via_dense.norm());
    }
}

TEST_CASE("hs_inner matches dense traces") {
    const int d = 3;
    Rng rng(23);
    auto rand_ts = [&](TensorSumOperator& t) {
        t.pairs = {{d, d}, {d, d}};
        std::vector<PairFactor> pool = {PairFactor::identity(), PairFactor::swap(),
                                        PairFactor::maxent()};
        for (int k = 0; k < 4; ++k) {
            TensorSumTerm term;
            term.coeff = rng.gaussian();
            term.factors = {pool[rng.raw() % 3], pool[rng.raw() % 3]};
            t.terms.push_back(term);
        }
    };
    for (int rep = 0; rep < 5; ++rep) {
        TensorSumOperator t1, t2;
        rand_ts(t1);
        rand_ts(t2);
        Complex fast = hs_inner(t1, t2);
        Complex slow =
            (t1.dense(false).mat.adjoint() * t2.dense(false).mat).trace();
        REQUIRE(std::abs(fast - slow) < 1e-10 * (1 + std::abs(slow)));
    }
}

TEST_CASE("contract_b_pair identity case") {
    const int d = 3;
    TensorSumOperator t;
    t.pairs = {{d, d}};
    t.terms = {{1.0, {PairFactor::identity()}}};
    Rng rng(24);
    SearchCandidate cand = haar_candidate(d, rng);
    Matrix out = contract_b_pair(t, cand);
    REQUIRE((out - Matrix::Identity(2 * d, 2 * d)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("contract_b_pair agrees with dense sandwich") {
    const int d = 3;
    // a UUVVF-style PT operator: mixtures of I and P on two pairs
    TensorSumOperator t;
    t.pairs = {{d, d}, {d, d}};
    auto pq = [&](double c, PairFactor f1, PairFactor f2) {
        t.terms.push_back({c, {f1, f2}});
    };
    const double eps = -0.2, delta = 0.1;
    // Q(x)Q + d eps (P(x)Q + Q(x)P) + delta d^2 P(x)P with Q = I - P expanded
    using PF = PairFactor;
    pq(1.0, PF::identity(), PF::identity());
    pq(-1.0 + d * eps, PF::identity(), PF::maxent());
    pq(-1.0 + d * eps, PF::maxent(), PF::identity());
    pq(1.0 - 2 * d * eps + delta * d * d, PF::maxent(), PF::maxent());

    DenseOperator dn = t.dense(false);
    Rng rng(25);
    for (int rep = 0; rep < 50; ++rep) {
        SearchCandidate cand = haar_candidate(d * d, rng);
        Matrix fast = contract_b_pair(t, cand);
        // dense sandwich
        Matrix p(2, d * d);
        p.row(0) = cand.a.adjoint();
        p.row(1) = cand.b.adjoint();
        Matrix ip = kron(Matrix::Identity(d * d, d * d), p);
        Matrix slow = ip * dn.mat * ip.adjoint();
        REQUIRE((fast - slow).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("contract_b_pair two-copy dimensions and hermiticity") {
    const int d = 3;
    // two copies of a 4-term two-pair operator -> 4 pairs, A dim 81
    TensorSumOperator t;
    t.pairs = {{d, d}, {d, d}};
    using PF = PairFactor;
    t.terms = {{1.0, {PF::identity(), PF::identity()}},
               {-0.36, {PF::identity(), PF::maxent()}},
               {-0.36, {PF::maxent(), PF::identity()}},
               {0.9, {PF::maxent(), PF::maxent()}}};
    TensorSumOperator t2 = t.tensor_power(2);
    Rng rng(26);
    SearchCandidate cand = haar_candidate(81, rng);
    Matrix out = contract_b_pair(t2, cand);
    REQUIRE(out.rows() == 162);
    REQUIRE((out - out.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("random_density statistics") {
    Rng rng(27);
    DenseOperator rho = random_density(3, 3, rng);
    REQUIRE(std::abs(rho.mat.trace().real() - 1.0) < 1e-12);
    REQUIRE(min_eigenvalue(rho.mat) > -1e-12);

    Rng r1(99), r2(99);
    DenseOperator a = random_density(2, 2, r1), b = random_density(2, 2, r2);
    REQUIRE((a.mat - b.mat).cwiseAbs().maxCoeff() == 0.0);

    // eigenvalues equal the simplex sample drawn from the same stream
    Rng draw(7);
    DenseOperator rho2 = random_density(3, 3, draw);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho2.mat, Eigen::EigenvaluesOnly);
    Rng probe(7);
    RealVector sample = simplex_point(9, probe);
    std::vector<double> want(sample.data(), sample.data() + 9);
    std::sort(want.begin(), want.end());
    RealVector ev = es.eigenvalues();
    std::vector<double> got(ev.data(), ev.data() + 9);
    std::sort(got.begin(), got.end());
    for (int i = 0; i < 9; ++i) REQUIRE(std::abs(got[i] - want[i]) < 1e-12);
}
