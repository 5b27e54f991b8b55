#pragma once

#include <Eigen/Sparse>
#include <string>

namespace stacktherm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

struct SolveOptions {
    double residual_tolerance = 1e-9;       // on ||b - A x||_inf, absolute
    std::size_t direct_threshold = 5000;    // unknowns below this go straight to LU
    int max_iterations = 4000;
    int refinement_rounds = 8;
};

struct SolveStats {
    std::string method;  // "lu", "bicgstab", "bicgstab+lu"
    int iterations = 0;
    double residual_inf = 0.0;
};

/// Solves A x = b for the (generally nonsymmetric) thermal system. Large
/// systems use BiCGSTAB preconditioned by an incomplete Cholesky factor of the
/// symmetric part of A; small ones, and any iterative run that misses the
/// tolerance, use sparse LU. Iterative refinement polishes the result.
/// Throws Error{FloatingNetwork} when the matrix is singular.
Vector solve_linear(const SparseMatrix& a, const Vector& b, const SolveOptions& options, SolveStats* stats = nullptr);

double residual_inf(const SparseMatrix& a, const Vector& x, const Vector& b);

}  // namespace stacktherm
