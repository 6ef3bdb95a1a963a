#pragma once

#include <map>
#include <string>
#include <vector>

namespace adgm {

/// Square sparse matrix in compressed-sparse-row form.
class SparseMatrix {
public:
  SparseMatrix() = default;
  /// Finalize from ordered per-row maps; drops exact zeros.
  explicit SparseMatrix(const std::vector<std::map<int, double>>& rows);

  int n() const { return n_; }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const;
  double coeff(int i, int j) const;
  /// max_ij |A_ij - A_ji|
  double symmetry_defect() const;
  double max_abs() const;
  std::vector<std::vector<double>> to_dense() const;

private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
};

enum class SolverMethod { cg, bicgstab };
enum class Preconditioner { none, jacobi_block };

struct SolverConfig {
  SolverMethod method = SolverMethod::cg;
  double tol = 1e-10;            // relative residual
  int max_iterations = 0;        // 0 -> 20 x DOFs
  Preconditioner precond = Preconditioner::jacobi_block;
  int block_size = 1;            // element DOF block for jacobi_block
};

struct SolveResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0;
  bool converged = false;
  std::string message;
};

SolveResult solve(const SparseMatrix& A, const std::vector<double>& b,
                  const SolverConfig& config);

/// Dense Gaussian elimination with partial pivoting; test oracle, n <= 600.
std::vector<double> dense_solve(std::vector<std::vector<double>> A,
                                std::vector<double> b);

double dot_product(const std::vector<double>& a, const std::vector<double>& b);
double l2_norm(const std::vector<double>& a);

}  // namespace adgm
