#include "stacktherm/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "stacktherm/error.hpp"

namespace stacktherm {

namespace {

// Eigen preconditioner concept, backed by an incomplete Cholesky factor of
// (A + A^T) / 2. Conduction dominates the thermal operator, so its symmetric
// part is SPD and close to A.
class SymmetricPartPreconditioner {
public:
    using StorageIndex = int;
    enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

    SymmetricPartPreconditioner() = default;
    template <typename MatrixType>
    explicit SymmetricPartPreconditioner(const MatrixType& m) { compute(m); }

    template <typename MatrixType>
    SymmetricPartPreconditioner& analyzePattern(const MatrixType&) { return *this; }
    template <typename MatrixType>
    SymmetricPartPreconditioner& factorize(const MatrixType& m) { return compute(m); }
    template <typename MatrixType>
    SymmetricPartPreconditioner& compute(const MatrixType& m) {
        SparseMatrix a = m;
        SparseMatrix at = a.transpose();
        SparseMatrix sym = 0.5 * (a + at);
        factor_.compute(sym);
        return *this;
    }

    template <typename Rhs>
    Vector solve(const Rhs& b) const { return factor_.solve(b); }

    Eigen::ComputationInfo info() const { return factor_.info(); }

private:
    Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>> factor_;
};

Vector lu_solve(const SparseMatrix& a, const Vector& b, Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>& lu) {
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw Error(ErrorKind::FloatingNetwork, "floating network: thermal system is singular");
    return lu.solve(b);
}

}  // namespace

double residual_inf(const SparseMatrix& a, const Vector& x, const Vector& b) {
    if (b.size() == 0) return 0.0;
    return (b - a * x).lpNorm<Eigen::Infinity>();
}

Vector solve_linear(const SparseMatrix& a, const Vector& b, const SolveOptions& options, SolveStats* stats) {
    SolveStats local;
    SolveStats& st = stats ? *stats : local;
    const auto n = static_cast<std::size_t>(a.rows());
    Vector x;

    bool done = false;
    if (n >= options.direct_threshold) {
        Eigen::BiCGSTAB<SparseMatrix, SymmetricPartPreconditioner> solver;
        solver.setMaxIterations(options.max_iterations);
        solver.setTolerance(1e-14);
        solver.compute(a);
        if (solver.info() == Eigen::Success) {
            x = solver.solve(b);
            st.method = "bicgstab";
            st.iterations = static_cast<int>(solver.iterations());
            for (int round = 0; round < options.refinement_rounds; ++round) {
                Vector r = b - a * x;
                if (r.lpNorm<Eigen::Infinity>() <= options.residual_tolerance) break;
                Vector dx = solver.solve(r);
                st.iterations += static_cast<int>(solver.iterations());
                x += dx;
            }
            done = x.allFinite() && residual_inf(a, x, b) <= options.residual_tolerance;
        }
    }
    if (!done) {
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        x = lu_solve(a, b, lu);
        st.method = st.method.empty() ? "lu" : st.method + "+lu";
        for (int round = 0; round < options.refinement_rounds; ++round) {
            Vector r = b - a * x;
            if (r.lpNorm<Eigen::Infinity>() <= options.residual_tolerance) break;
            x += lu.solve(r);
        }
        if (!x.allFinite()) throw Error(ErrorKind::FloatingNetwork, "floating network: solve produced non-finite values");
    }
    st.residual_inf = residual_inf(a, x, b);
    return x;
}

}  // namespace stacktherm
