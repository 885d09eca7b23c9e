#include "panoma/harness.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace panoma {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string joined(const std::vector<double> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i)
      s += ';';
    s += num(v[i]);
  }
  return s;
}

std::string point_cells(const SweepPoint &p) {
  return num(p.f_c_ghz) + "," + std::to_string(p.K) + "," + std::to_string(p.N) + "," + num(p.p_max_dbm);
}

void write_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out)
    throw std::runtime_error("write failed: " + path.string());
}

json complex_vector(const Eigen::VectorXcd &v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

json record_json(const IterationRecord &r) {
  return {{"iteration", r.iteration},
          {"surrogate", r.surrogate},
          {"sum_rate", r.sum_rate},
          {"true_rate", r.true_rate},
          {"accepted", r.accepted},
          {"solver_status", r.solver_status},
          {"solver_iterations", r.solver_iterations},
          {"primal_residual", r.primal_residual},
          {"dual_residual", r.dual_residual},
          {"gap", r.gap},
          {"trust_radius", r.trust_radius},
          {"eig_ratio", r.eig_ratio},
          {"randomized", r.randomized},
          {"blend", r.blend}};
}

} // namespace

std::string trials_csv(const std::vector<TrialResult> &trials) {
  std::string s = "f_c_ghz,K,N,p_max_dbm,drop,seed,scheme,sum_rate,feasible,iterations,status,pin_x,per_user_rate\n";
  for (const auto &t : trials) {
    s += point_cells(t.point) + "," + std::to_string(t.drop) + "," + std::to_string(t.seed) + "," +
         std::string(to_string(t.scheme)) + "," + num(t.sum_rate) + "," + (t.feasible ? "1" : "0") + "," +
         std::to_string(t.iterations) + "," + t.status + "," + joined(t.pin_x) + "," + joined(t.per_user_rate) + "\n";
  }
  return s;
}

std::string aggregate_csv(const std::vector<Aggregate> &agg) {
  std::string s = "f_c_ghz,K,N,p_max_dbm,scheme,mean,std,n,feasible\n";
  for (const auto &a : agg)
    s += point_cells(a.point) + "," + std::string(to_string(a.scheme)) + "," + num(a.mean) + "," + num(a.stddev) +
         "," + std::to_string(a.n) + "," + std::to_string(a.feasible) + "\n";
  return s;
}

json trial_json(const TrialResult &t) {
  json users = json::array();
  for (const auto &u : t.users)
    users.push_back({u.x, u.y});
  json precoders = json::array();
  for (const auto &w : t.precoders.w)
    precoders.push_back(complex_vector(w));
  json steps = json::array();
  for (const auto &h : t.trace.steps)
    steps.push_back({{"outer", h.outer},
                     {"kind", h.kind},
                     {"sum_rate", h.sum_rate},
                     {"accepted", h.accepted},
                     {"inner_iterations", h.inner_iterations},
                     {"inner_status", h.inner_status}});
  json inner = json::array();
  for (const auto &r : t.trace.inner_trace)
    inner.push_back(record_json(r));
  return {{"f_c_ghz", t.point.f_c_ghz},
          {"K", t.point.K},
          {"N", t.point.N},
          {"p_max_dbm", t.point.p_max_dbm},
          {"drop", t.drop},
          {"seed", t.seed},
          {"scheme", std::string(to_string(t.scheme))},
          {"users", users},
          {"sum_rate", t.sum_rate},
          {"feasible", t.feasible},
          {"per_user_rate", t.per_user_rate},
          {"pin_x", t.pin_x},
          {"budget", t.precoders.budget},
          {"precoders", precoders},
          {"iterations", t.iterations},
          {"status", t.status},
          {"error", t.error},
          {"wall_seconds", t.wall_seconds},
          {"randomized", t.trace.randomized},
          {"worst_eig_ratio", t.trace.worst_eig_ratio},
          {"accepted_rates", t.trace.accepted_rates},
          {"steps", steps},
          {"inner", inner}};
}

void emit_results(const std::vector<TrialResult> &trials, const std::filesystem::path &dir, bool traces) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "trials.csv", trials_csv(trials));
  write_file(dir / "summary.csv", aggregate_csv(aggregate(trials)));
  if (!traces)
    return;
  const auto tdir = dir / "traces";
  std::filesystem::create_directories(tdir, ec);
  if (ec)
    throw std::runtime_error("cannot create " + tdir.string() + ": " + ec.message());
  for (const auto &t : trials) {
    const std::string name = "f" + num(t.point.f_c_ghz) + "_K" + std::to_string(t.point.K) + "_N" +
                             std::to_string(t.point.N) + "_P" + num(t.point.p_max_dbm) + "_d" +
                             std::to_string(t.drop) + "_" + std::string(to_string(t.scheme)) + ".json";
    write_file(tdir / name, trial_json(t).dump(1) + "\n");
  }
}

} // namespace panoma
