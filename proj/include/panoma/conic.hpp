#pragma once

// A small conic-programming layer: a typed program model (variable blocks,
// linear expressions, cone constraints) and a first-order solver that runs
// ADMM on the homogeneous self-dual embedding.
//
// Standard form used by the solver:
//     minimize c'x   subject to   A x + s = b,  s in K
// where K is a product of zero, nonnegative, second-order, PSD and
// exponential cones. A constraint "expr in K" becomes s = expr, i.e. the row
// of A is the negated coefficient vector and b the expression's constant.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace panoma::conic {

enum class ConeKind { zero, nonneg, soc, psd, exp };
enum class BlockKind { scalar, vector, hermitian };
enum class Sense { maximize, minimize };

std::string_view to_string(ConeKind c);
std::string_view to_string(BlockKind b);

struct Term {
  int var = 0;
  double coef = 0.0;
};

class LinExpr {
public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {} // NOLINT: implicit from scalar is intended

  static LinExpr variable(int index, double coef = 1.0);

  LinExpr &operator+=(const LinExpr &o);
  LinExpr &operator-=(const LinExpr &o);
  LinExpr &operator*=(double f);

  friend LinExpr operator+(LinExpr a, const LinExpr &b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr &b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double f) { return a *= f; }
  friend LinExpr operator*(double f, LinExpr a) { return a *= f; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

  void add_term(int var, double coef);
  const std::vector<Term> &terms() const { return terms_; }
  double constant() const { return constant_; }
  void set_constant(double c) { constant_ = c; }

  double evaluate(std::span<const double> x) const;

  /// Merges duplicate variables and drops zero coefficients.
  LinExpr &compress();

private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

struct VarBlock {
  std::string name;
  BlockKind kind = BlockKind::scalar;
  int dim = 1;    // vector length, or matrix order for hermitian blocks
  int offset = 0; // first scalar variable
  int size = 1;   // scalar variables in the block

  static int size_for(BlockKind kind, int dim);
};

struct Constraint {
  ConeKind cone = ConeKind::nonneg;
  std::vector<LinExpr> rows;
  int psd_dim = 0; // order of the matrix for psd cones; rows hold its lower triangle, column-major
  std::string name;
};

struct Objective {
  LinExpr expr;
  Sense sense = Sense::maximize;
};

class ConicProgram {
public:
  const std::vector<VarBlock> &blocks() const { return blocks_; }
  const Objective &objective() const { return objective_; }
  const std::vector<Constraint> &constraints() const { return constraints_; }
  const std::string &name() const { return name_; }
  int num_vars() const { return num_vars_; }

  const VarBlock &block(std::string_view name) const;
  std::size_t count(ConeKind cone) const;
  std::size_t rows(ConeKind cone) const;

private:
  friend ConicProgram build(std::vector<VarBlock>, Objective, std::vector<Constraint>, std::string);
  std::vector<VarBlock> blocks_;
  Objective objective_;
  std::vector<Constraint> constraints_;
  std::string name_;
  int num_vars_ = 0;
};

/// Validates and assembles a program. Throws std::invalid_argument on
/// dimension mismatches, overlapping blocks or unknown variable references.
ConicProgram build(std::vector<VarBlock> blocks, Objective objective,
                   std::vector<Constraint> constraints, std::string name = {});

/// Incremental construction with typed handles.
class ProgramBuilder {
public:
  explicit ProgramBuilder(std::string name = {}) : name_(std::move(name)) {}

  int add_scalar(std::string name);
  int add_vector(std::string name, int dim);
  /// Complex Hermitian dim x dim matrix, stored as dim^2 real parameters:
  /// the real parts of the upper triangle (diagonal included) followed by
  /// the imaginary parts of the strict upper triangle.
  int add_hermitian(std::string name, int dim);

  LinExpr var(int block, int i = 0) const;
  LinExpr re(int block, int i, int j) const;
  LinExpr im(int block, int i, int j) const;
  /// Tr(H X) for a Hermitian constant H and Hermitian block X (always real).
  LinExpr trace_product(int block, const Eigen::MatrixXcd &H) const;

  void add_zero(LinExpr e, std::string name = {});
  void add_nonneg(LinExpr e, std::string name = {});
  /// rows[0] >= || rows[1:] ||
  void add_soc(std::vector<LinExpr> rows, std::string name = {});
  /// lower triangle of an n x n symmetric matrix, column-major
  void add_psd(std::vector<LinExpr> lower, int n, std::string name = {});
  /// y exp(x / y) <= z
  void add_exp(LinExpr x, LinExpr y, LinExpr z, std::string name = {});
  /// X >= 0 through the real symmetric embedding [[Re X, -Im X], [Im X, Re X]].
  void add_hermitian_psd(int block, std::string name = {});
  /// t <= ln(r), expressed as the exponential-cone row (t, 1, r).
  void add_log_epigraph(LinExpr t, LinExpr r, std::string name = {});

  void maximize(LinExpr e) { objective_ = {std::move(e), Sense::maximize}; }
  void minimize(LinExpr e) { objective_ = {std::move(e), Sense::minimize}; }

  const VarBlock &block(int id) const { return blocks_.at(static_cast<std::size_t>(id)); }
  ConicProgram build() const;

private:
  int add_block(std::string name, BlockKind kind, int dim);

  std::string name_;
  std::vector<VarBlock> blocks_;
  std::vector<Constraint> constraints_;
  Objective objective_;
  int next_offset_ = 0;
};

/// Reconstructs a Hermitian matrix from its block values.
Eigen::MatrixXcd hermitian_from_values(std::span<const double> values, int dim);

/// Real symmetric embedding of a Hermitian matrix.
Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd &H);

// ---------------------------------------------------------------------------
// Standard form

struct ConeDims {
  int zero = 0;
  int nonneg = 0;
  std::vector<int> soc;
  std::vector<int> psd; // matrix orders
  int exp = 0;          // number of 3-dim cones

  int total_rows() const;
};

struct StandardForm {
  Eigen::SparseMatrix<double> A; // m x n
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double objective_offset = 0.0;
  double objective_sign = 1.0; // +1 minimize, -1 maximize the original objective
  ConeDims cones;
  /// first standard-form row of each program constraint
  std::vector<int> constraint_row;
};

StandardForm to_standard_form(const ConicProgram &p);

/// Projects v onto K (or the dual cone K*) for the given cone layout.
void project_cone(const ConeDims &k, std::span<double> v, bool dual);

// ---------------------------------------------------------------------------
// Solver

enum class SolveStatus { optimal, infeasible, unbounded, max_iter, numerical_failure };
std::string_view to_string(SolveStatus s);

struct WarmStart {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> s;
};

struct SolverSettings {
  double tol_primal = 1e-7;
  double tol_dual = 1e-7;
  double tol_gap = 1e-8;
  double tol_infeasible = 1e-8;
  int max_iter = 50000;
  double relaxation = 1.5;
  int anderson_memory = 20;
  int stall_window = 5000;
  double stall_improvement = 1e-10;
  int check_interval = 10;
  bool normalize = true;
  double scale = 10.0;
  bool adaptive_scale = true;
  double rho_x = 1e-6;
  std::optional<WarmStart> warm_start;
};

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<double> x;     // one value per program scalar variable
  std::vector<double> y;     // standard-form dual, or the Farkas certificate when infeasible
  std::vector<double> s;     // standard-form slack
  double objective = 0.0;    // in the program's own sense
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  int restarts = 0;

  bool ok() const { return status == SolveStatus::optimal; }
  std::vector<double> values(const ConicProgram &p, std::string_view block) const;
  double value(const ConicProgram &p, std::string_view block, int i = 0) const;
};

SolveResult solve(const ConicProgram &p, const SolverSettings &settings = {});

// ---------------------------------------------------------------------------
// JSON

std::string to_json(const ConicProgram &p);
ConicProgram program_from_json(std::string_view text);

} // namespace panoma::conic
