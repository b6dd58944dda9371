// Dense bipartite operators: Kronecker products, partial transpose,
// Hermitian minimum eigenvalue, the elementary operators F/P/Q and
// Schmidt analysis of pure vectors.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include "distilkit/rng.hpp"

namespace distilkit {

constexpr double kHermitianTol = 1e-10;

// Square operator on H_A (x) H_B; the row index is a*dim_b + b.
struct DenseOperator {
    int dim_a = 1;
    int dim_b = 1;
    Matrix mat;
    bool hermitian = false;

    DenseOperator() = default;
    DenseOperator(int da, int db, Matrix m, bool herm = false)
        : dim_a(da), dim_b(db), mat(std::move(m)), hermitian(herm) {
        if (da < 1 || db < 1) throw std::invalid_argument("dims must be positive");
        const long n = static_cast<long>(da) * db;
        if (mat.rows() != n || mat.cols() != n)
            throw std::invalid_argument("matrix size does not match dim_a*dim_b");
        if (hermitian) {
            double dev = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
            if (dev > 1e-12)
                throw std::invalid_argument("hermitian flag set but deviation " +
                                            std::to_string(dev));
        }
    }

    int dim() const { return dim_a * dim_b; }
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Matrix partial_transpose(const Matrix& x, int dim_a, int dim_b) {
    const long n = static_cast<long>(dim_a) * dim_b;
    if (x.rows() != n || x.cols() != n)
        throw std::invalid_argument("partial_transpose: size mismatch");
    Matrix out(n, n);
    for (int i = 0; i < dim_a; ++i)
        for (int j = 0; j < dim_b; ++j)
            for (int k = 0; k < dim_a; ++k)
                for (int l = 0; l < dim_b; ++l)
                    out(i * dim_b + j, k * dim_b + l) = x(i * dim_b + l, k * dim_b + j);
    return out;
}

inline DenseOperator partial_transpose(const DenseOperator& x) {
    return DenseOperator(x.dim_a, x.dim_b, partial_transpose(x.mat, x.dim_a, x.dim_b),
                         x.hermitian);
}

inline void require_hermitian(const Matrix& h, double tol = kHermitianTol) {
    double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    double dev = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (dev > tol * scale) throw std::invalid_argument("operator is not Hermitian");
}

inline double min_eigenvalue(const Matrix& h) {
    require_hermitian(h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double min_eigenvalue(const DenseOperator& h) { return min_eigenvalue(h.mat); }

struct EigenPair {
    double value;
    Vector vector;
};

inline EigenPair min_eigenpair(const Matrix& h) {
    require_hermitian(h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    long idx = 0;
    es.eigenvalues().minCoeff(&idx);
    return {es.eigenvalues()[idx], es.eigenvectors().col(idx)};
}

// Elementary operators on C^d (x) C^d.
inline Matrix identity_operator(int d) { return Matrix::Identity(d * d, d * d); }

// F = sum_ij |ij><ji|, the swap.
inline Matrix flip_operator(int d) {
    Matrix f = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) f(i * d + j, j * d + i) = 1.0;
    return f;
}

// P = (1/d) sum_ij |ii><jj|, the maximally entangled projector.
inline Matrix me_projector(int d) {
    Matrix p = Matrix::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p(i * d + i, j * d + j) = 1.0 / d;
    return p;
}

struct ElementaryOperators {
    Matrix identity;
    Matrix flip;
    Matrix me_proj;
    Matrix complement;  // Q = 1 - P
};

inline ElementaryOperators elementary_operators(int d) {
    if (d < 2) throw std::invalid_argument("elementary_operators: d must be >= 2");
    ElementaryOperators ops;
    ops.identity = identity_operator(d);
    ops.flip = flip_operator(d);
    ops.me_proj = me_projector(d);
    ops.complement = ops.identity - ops.me_proj;
    return ops;
}

struct PureVector {
    int dim_a = 1;
    int dim_b = 1;
    Vector amps;

    PureVector() = default;
    PureVector(int da, int db, Vector v) : dim_a(da), dim_b(db), amps(std::move(v)) {
        if (amps.size() != static_cast<long>(da) * db)
            throw std::invalid_argument("PureVector: length mismatch");
        double n = amps.norm();
        if (std::abs(n - 1.0) > 1e-12) {
            if (n == 0.0) throw std::invalid_argument("PureVector: zero vector");
            amps /= n;
        }
    }
};

inline PureVector normalized_vector(int da, int db, Vector v) {
    v /= v.norm();
    return PureVector(da, db, std::move(v));
}

inline Eigen::VectorXd schmidt_coefficients(const PureVector& v) {
    Eigen::Map<const Matrix> m(v.amps.data(), v.dim_b, v.dim_a);  // column-major: (b, a)
    Eigen::JacobiSVD<Matrix> svd(m.transpose());
    return svd.singularValues();
}

inline int schmidt_rank(const PureVector& v, double tol = 1e-10) {
    auto sv = schmidt_coefficients(v);
    int r = 0;
    for (long i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++r;
    return r;
}

// Orthonormal pair (a, b) in the B-side space; defines P = |0><a| + |1><b|.
struct SearchCandidate {
    int b_dim = 0;
    Vector a;
    Vector b;

    SearchCandidate() = default;
    SearchCandidate(Vector av, Vector bv)
        : b_dim(static_cast<int>(av.size())), a(std::move(av)), b(std::move(bv)) {
        if (b.size() != b_dim) throw std::invalid_argument("SearchCandidate: size mismatch");
        if (std::abs(a.norm() - 1.0) > 1e-10 || std::abs(b.norm() - 1.0) > 1e-10)
            throw std::invalid_argument("SearchCandidate: vectors must be unit norm");
        if (std::abs(a.dot(b)) > 1e-10)
            throw std::invalid_argument("SearchCandidate: vectors must be orthogonal");
    }
};

inline SearchCandidate haar_candidate(int b_dim, Rng& rng) {
    Matrix u = haar_unitary(b_dim, rng);
    return SearchCandidate(u.col(0), u.col(1));
}

// Random density matrix from the D x U product measure (ZHSL).
inline DenseOperator random_density(int dim_a, int dim_b, Rng& rng) {
    const int n = dim_a * dim_b;
    RealVector evals = simplex_point(n, rng);
    Matrix u = haar_unitary(n, rng);
    Matrix rho = u * evals.asDiagonal() * u.adjoint();
    rho = (rho + rho.adjoint()) / 2.0;  // scrub rounding
    return DenseOperator(dim_a, dim_b, std::move(rho), true);
}

}  // namespace distilkit
