#include "panoma/conic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "panoma/cones.hpp"

namespace panoma::conic {

std::string_view to_string(ConeKind c) {
  switch (c) {
  case ConeKind::zero: return "zero";
  case ConeKind::nonneg: return "nonneg";
  case ConeKind::soc: return "soc";
  case ConeKind::psd: return "psd";
  case ConeKind::exp: return "exp";
  }
  return "?";
}

std::string_view to_string(BlockKind b) {
  switch (b) {
  case BlockKind::scalar: return "scalar";
  case BlockKind::vector: return "vector";
  case BlockKind::hermitian: return "hermitian";
  }
  return "?";
}

// --- LinExpr ---------------------------------------------------------------

LinExpr LinExpr::variable(int index, double coef) {
  LinExpr e;
  e.terms_.push_back({index, coef});
  return e;
}

void LinExpr::add_term(int var, double coef) { terms_.push_back({var, coef}); }

LinExpr &LinExpr::operator+=(const LinExpr &o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

LinExpr &LinExpr::operator-=(const LinExpr &o) {
  for (const auto &t : o.terms_)
    terms_.push_back({t.var, -t.coef});
  constant_ -= o.constant_;
  return *this;
}

LinExpr &LinExpr::operator*=(double f) {
  for (auto &t : terms_)
    t.coef *= f;
  constant_ *= f;
  return *this;
}

double LinExpr::evaluate(std::span<const double> x) const {
  double v = constant_;
  for (const auto &t : terms_)
    v += t.coef * x[static_cast<std::size_t>(t.var)];
  return v;
}

LinExpr &LinExpr::compress() {
  std::sort(terms_.begin(), terms_.end(), [](const Term &a, const Term &b) { return a.var < b.var; });
  std::vector<Term> out;
  for (const auto &t : terms_) {
    if (!out.empty() && out.back().var == t.var)
      out.back().coef += t.coef;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const Term &t) { return t.coef == 0.0; });
  terms_ = std::move(out);
  return *this;
}

// --- program ---------------------------------------------------------------

int VarBlock::size_for(BlockKind kind, int dim) {
  switch (kind) {
  case BlockKind::scalar: return 1;
  case BlockKind::vector: return dim;
  case BlockKind::hermitian: return dim * dim;
  }
  return 0;
}

const VarBlock &ConicProgram::block(std::string_view name) const {
  for (const auto &b : blocks_)
    if (b.name == name)
      return b;
  throw std::invalid_argument("unknown variable block: " + std::string(name));
}

std::size_t ConicProgram::count(ConeKind cone) const {
  return static_cast<std::size_t>(std::count_if(constraints_.begin(), constraints_.end(),
                                                [&](const Constraint &c) { return c.cone == cone; }));
}

std::size_t ConicProgram::rows(ConeKind cone) const {
  std::size_t r = 0;
  for (const auto &c : constraints_)
    if (c.cone == cone)
      r += c.rows.size();
  return r;
}

ConicProgram build(std::vector<VarBlock> blocks, Objective objective,
                   std::vector<Constraint> constraints, std::string name) {
  int next = 0;
  for (const auto &b : blocks) {
    if (b.dim < 1)
      throw std::invalid_argument("block '" + b.name + "' has non-positive dimension");
    if (b.kind == BlockKind::scalar && b.dim != 1)
      throw std::invalid_argument("scalar block '" + b.name + "' must have dim 1");
    if (b.size != VarBlock::size_for(b.kind, b.dim))
      throw std::invalid_argument("block '" + b.name + "' size does not match its kind");
    if (b.offset != next)
      throw std::invalid_argument("block '" + b.name + "' is not contiguous with its predecessor");
    next += b.size;
  }
  const int n = next;
  auto check_expr = [n](const LinExpr &e, const std::string &where) {
    for (const auto &t : e.terms())
      if (t.var < 0 || t.var >= n)
        throw std::invalid_argument("unknown variable reference " + std::to_string(t.var) + " in " + where);
    if (!std::isfinite(e.constant()))
      throw std::invalid_argument("non-finite constant in " + where);
    for (const auto &t : e.terms())
      if (!std::isfinite(t.coef))
        throw std::invalid_argument("non-finite coefficient in " + where);
  };
  check_expr(objective.expr, "objective");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    auto &c = constraints[i];
    const std::string where = c.name.empty() ? "constraint #" + std::to_string(i) : c.name;
    const auto m = static_cast<int>(c.rows.size());
    switch (c.cone) {
    case ConeKind::zero:
    case ConeKind::nonneg:
      if (m < 1)
        throw std::invalid_argument(where + ": empty constraint");
      break;
    case ConeKind::soc:
      if (m < 1)
        throw std::invalid_argument(where + ": second-order cone needs at least one row");
      break;
    case ConeKind::psd:
      if (c.psd_dim < 1 || m != svec_size(c.psd_dim))
        throw std::invalid_argument(where + ": psd cone rows do not match matrix order");
      break;
    case ConeKind::exp:
      if (m != 3)
        throw std::invalid_argument(where + ": exponential cone takes exactly 3 rows");
      break;
    }
    for (auto &r : c.rows) {
      check_expr(r, where);
      r.compress();
    }
  }
  objective.expr.compress();

  ConicProgram p;
  p.blocks_ = std::move(blocks);
  p.objective_ = std::move(objective);
  p.constraints_ = std::move(constraints);
  p.name_ = std::move(name);
  p.num_vars_ = n;
  return p;
}

// --- builder ---------------------------------------------------------------

int ProgramBuilder::add_block(std::string name, BlockKind kind, int dim) {
  for (const auto &b : blocks_)
    if (b.name == name)
      throw std::invalid_argument("duplicate block name: " + name);
  VarBlock b{std::move(name), kind, dim, next_offset_, VarBlock::size_for(kind, dim)};
  next_offset_ += b.size;
  blocks_.push_back(std::move(b));
  return static_cast<int>(blocks_.size()) - 1;
}

int ProgramBuilder::add_scalar(std::string name) { return add_block(std::move(name), BlockKind::scalar, 1); }
int ProgramBuilder::add_vector(std::string name, int dim) { return add_block(std::move(name), BlockKind::vector, dim); }
int ProgramBuilder::add_hermitian(std::string name, int dim) {
  return add_block(std::move(name), BlockKind::hermitian, dim);
}

LinExpr ProgramBuilder::var(int id, int i) const {
  const auto &b = block(id);
  if (i < 0 || i >= b.size)
    throw std::out_of_range("variable index out of range in block " + b.name);
  return LinExpr::variable(b.offset + i);
}

namespace {

int herm_re_index(int n, int i, int j) { // i <= j
  return i * n - i * (i - 1) / 2 + (j - i);
}

int herm_im_index(int n, int i, int j) { // i < j
  return n * (n + 1) / 2 + i * (n - 1) - i * (i - 1) / 2 + (j - i - 1);
}

} // namespace

LinExpr ProgramBuilder::re(int id, int i, int j) const {
  const auto &b = block(id);
  if (b.kind != BlockKind::hermitian)
    throw std::invalid_argument("block " + b.name + " is not hermitian");
  if (i > j)
    std::swap(i, j);
  return LinExpr::variable(b.offset + herm_re_index(b.dim, i, j));
}

LinExpr ProgramBuilder::im(int id, int i, int j) const {
  const auto &b = block(id);
  if (b.kind != BlockKind::hermitian)
    throw std::invalid_argument("block " + b.name + " is not hermitian");
  if (i == j)
    return LinExpr{};
  if (i > j)
    return LinExpr::variable(b.offset + herm_im_index(b.dim, j, i), -1.0);
  return LinExpr::variable(b.offset + herm_im_index(b.dim, i, j));
}

LinExpr ProgramBuilder::trace_product(int id, const Eigen::MatrixXcd &H) const {
  const auto &b = block(id);
  if (H.rows() != b.dim || H.cols() != b.dim)
    throw std::invalid_argument("trace_product: matrix order mismatch");
  LinExpr e;
  for (int i = 0; i < b.dim; ++i)
    for (int j = 0; j < b.dim; ++j) {
      const auto h = H(i, j);
      if (h.real() != 0.0)
        e += re(id, j, i) * h.real();
      if (h.imag() != 0.0 && i != j)
        e -= im(id, j, i) * h.imag();
    }
  e.compress();
  return e;
}

void ProgramBuilder::add_zero(LinExpr e, std::string name) {
  constraints_.push_back({ConeKind::zero, {std::move(e)}, 0, std::move(name)});
}
void ProgramBuilder::add_nonneg(LinExpr e, std::string name) {
  constraints_.push_back({ConeKind::nonneg, {std::move(e)}, 0, std::move(name)});
}
void ProgramBuilder::add_soc(std::vector<LinExpr> rows, std::string name) {
  constraints_.push_back({ConeKind::soc, std::move(rows), 0, std::move(name)});
}
void ProgramBuilder::add_psd(std::vector<LinExpr> lower, int n, std::string name) {
  constraints_.push_back({ConeKind::psd, std::move(lower), n, std::move(name)});
}
void ProgramBuilder::add_exp(LinExpr x, LinExpr y, LinExpr z, std::string name) {
  constraints_.push_back({ConeKind::exp, {std::move(x), std::move(y), std::move(z)}, 0, std::move(name)});
}

void ProgramBuilder::add_hermitian_psd(int id, std::string name) {
  const auto &b = block(id);
  const int n = b.dim;
  std::vector<LinExpr> lower;
  lower.reserve(static_cast<std::size_t>(svec_size(2 * n)));
  for (int j = 0; j < 2 * n; ++j)
    for (int i = j; i < 2 * n; ++i) {
      if (i < n)
        lower.push_back(re(id, i, j));
      else if (j >= n)
        lower.push_back(re(id, i - n, j - n));
      else
        lower.push_back(im(id, i - n, j));
    }
  add_psd(std::move(lower), 2 * n, std::move(name));
}

void ProgramBuilder::add_log_epigraph(LinExpr t, LinExpr r, std::string name) {
  add_exp(std::move(t), LinExpr{1.0}, std::move(r), std::move(name));
}

ConicProgram ProgramBuilder::build() const {
  return conic::build(blocks_, objective_, constraints_, name_);
}

Eigen::MatrixXcd hermitian_from_values(std::span<const double> v, int n) {
  Eigen::MatrixXcd X(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double r = v[static_cast<std::size_t>(herm_re_index(n, i, j))];
      const double m = (i == j) ? 0.0 : v[static_cast<std::size_t>(herm_im_index(n, i, j))];
      X(i, j) = {r, m};
      X(j, i) = {r, -m};
    }
  return X;
}

Eigen::MatrixXd real_embedding(const Eigen::MatrixXcd &H) {
  const auto n = H.rows();
  Eigen::MatrixXd M(2 * n, 2 * n);
  M.topLeftCorner(n, n) = H.real();
  M.bottomRightCorner(n, n) = H.real();
  M.bottomLeftCorner(n, n) = H.imag();
  M.topRightCorner(n, n) = -H.imag();
  return M;
}

// --- standard form -----------------------------------------------------------

int ConeDims::total_rows() const {
  int m = zero + nonneg + 3 * exp;
  for (int q : soc)
    m += q;
  for (int s : psd)
    m += svec_size(s);
  return m;
}

StandardForm to_standard_form(const ConicProgram &p) {
  const auto &cons = p.constraints();
  StandardForm sf;
  sf.constraint_row.assign(cons.size(), -1);

  std::vector<std::size_t> order;
  for (ConeKind kind : {ConeKind::zero, ConeKind::nonneg, ConeKind::soc, ConeKind::psd, ConeKind::exp})
    for (std::size_t i = 0; i < cons.size(); ++i)
      if (cons[i].cone == kind)
        order.push_back(i);

  int m = 0;
  for (std::size_t i : order) {
    const auto &c = cons[i];
    sf.constraint_row[i] = m;
    switch (c.cone) {
    case ConeKind::zero: sf.cones.zero += static_cast<int>(c.rows.size()); break;
    case ConeKind::nonneg: sf.cones.nonneg += static_cast<int>(c.rows.size()); break;
    case ConeKind::soc: sf.cones.soc.push_back(static_cast<int>(c.rows.size())); break;
    case ConeKind::psd: sf.cones.psd.push_back(c.psd_dim); break;
    case ConeKind::exp: sf.cones.exp += 1; break;
    }
    m += static_cast<int>(c.rows.size());
  }

  const int n = p.num_vars();
  sf.b = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::Triplet<double>> trip;
  int row = 0;
  for (std::size_t i : order) {
    const auto &c = cons[i];
    int col = 0, diag_row = 0; // position in lower triangle for psd scaling
    for (const auto &e : c.rows) {
      double scale = 1.0;
      if (c.cone == ConeKind::psd) {
        if (diag_row != col)
          scale = std::numbers::sqrt2;
        if (++diag_row == c.psd_dim) {
          ++col;
          diag_row = col;
        }
      }
      for (const auto &t : e.terms())
        trip.emplace_back(row, t.var, -scale * t.coef);
      sf.b(row) = scale * e.constant();
      ++row;
    }
  }
  sf.A.resize(m, n);
  sf.A.setFromTriplets(trip.begin(), trip.end());
  sf.A.makeCompressed();

  sf.c = Eigen::VectorXd::Zero(n);
  sf.objective_sign = p.objective().sense == Sense::minimize ? 1.0 : -1.0;
  for (const auto &t : p.objective().expr.terms())
    sf.c(t.var) += sf.objective_sign * t.coef;
  sf.objective_offset = p.objective().expr.constant();
  return sf;
}

void project_cone(const ConeDims &k, std::span<double> v, bool dual) {
  std::size_t pos = 0;
  if (!dual)
    std::fill(v.begin(), v.begin() + k.zero, 0.0);
  pos += static_cast<std::size_t>(k.zero);
  project_nonneg(v.subspan(pos, static_cast<std::size_t>(k.nonneg)));
  pos += static_cast<std::size_t>(k.nonneg);
  for (int q : k.soc) {
    project_soc(v.subspan(pos, static_cast<std::size_t>(q)));
    pos += static_cast<std::size_t>(q);
  }
  for (int s : k.psd) {
    const auto len = static_cast<std::size_t>(svec_size(s));
    project_psd(v.subspan(pos, len), s);
    pos += len;
  }
  for (int e = 0; e < k.exp; ++e) {
    if (dual)
      project_exp_dual(v.subspan(pos, 3));
    else
      project_exp(v.subspan(pos, 3));
    pos += 3;
  }
}

} // namespace panoma::conic
