#include "panoma/conic.hpp"

#include <stdexcept>

#include <json.hpp>

namespace panoma::conic {

using nlohmann::json;

namespace {

json expr_json(const LinExpr &e) {
  json terms = json::array();
  for (const auto &t : e.terms())
    terms.push_back(json::array({t.var, t.coef}));
  return {{"constant", e.constant()}, {"terms", std::move(terms)}};
}

LinExpr expr_from(const json &j) {
  LinExpr e(j.value("constant", 0.0));
  for (const auto &t : j.at("terms")) {
    if (!t.is_array() || t.size() != 2)
      throw std::invalid_argument("term must be a [variable, coefficient] pair");
    e.add_term(t[0].get<int>(), t[1].get<double>());
  }
  return e;
}

ConeKind cone_from(const std::string &s) {
  for (ConeKind c : {ConeKind::zero, ConeKind::nonneg, ConeKind::soc, ConeKind::psd, ConeKind::exp})
    if (to_string(c) == s)
      return c;
  throw std::invalid_argument("unknown cone tag: " + s);
}

BlockKind block_from(const std::string &s) {
  for (BlockKind b : {BlockKind::scalar, BlockKind::vector, BlockKind::hermitian})
    if (to_string(b) == s)
      return b;
  throw std::invalid_argument("unknown block kind: " + s);
}

} // namespace

std::string to_json(const ConicProgram &p) {
  json blocks = json::array();
  for (const auto &b : p.blocks())
    blocks.push_back({{"name", b.name}, {"kind", std::string(to_string(b.kind))}, {"dim", b.dim}});
  json cons = json::array();
  for (const auto &c : p.constraints()) {
    json rows = json::array();
    for (const auto &r : c.rows)
      rows.push_back(expr_json(r));
    json jc = {{"name", c.name}, {"cone", std::string(to_string(c.cone))}, {"rows", std::move(rows)}};
    if (c.cone == ConeKind::psd)
      jc["psd_dim"] = c.psd_dim;
    cons.push_back(std::move(jc));
  }
  json obj = expr_json(p.objective().expr);
  obj["sense"] = p.objective().sense == Sense::maximize ? "maximize" : "minimize";
  json out = {{"format", "panoma-conic-1"},
              {"name", p.name()},
              {"blocks", std::move(blocks)},
              {"objective", std::move(obj)},
              {"constraints", std::move(cons)}};
  return out.dump(1);
}

ConicProgram program_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument(std::string("malformed program JSON: ") + e.what());
  }
  try {
    std::vector<VarBlock> blocks;
    int offset = 0;
    for (const auto &jb : j.at("blocks")) {
      VarBlock b;
      b.name = jb.at("name").get<std::string>();
      b.kind = block_from(jb.at("kind").get<std::string>());
      b.dim = jb.value("dim", 1);
      b.offset = offset;
      b.size = VarBlock::size_for(b.kind, b.dim);
      offset += b.size;
      blocks.push_back(std::move(b));
    }
    const auto &jo = j.at("objective");
    Objective obj{expr_from(jo), Sense::maximize};
    const auto sense = jo.value("sense", std::string("maximize"));
    if (sense == "minimize")
      obj.sense = Sense::minimize;
    else if (sense != "maximize")
      throw std::invalid_argument("unknown objective sense: " + sense);

    std::vector<Constraint> cons;
    for (const auto &jc : j.at("constraints")) {
      Constraint c;
      c.name = jc.value("name", std::string());
      c.cone = cone_from(jc.at("cone").get<std::string>());
      c.psd_dim = jc.value("psd_dim", 0);
      for (const auto &r : jc.at("rows"))
        c.rows.push_back(expr_from(r));
      cons.push_back(std::move(c));
    }
    return build(std::move(blocks), std::move(obj), std::move(cons), j.value("name", std::string()));
  } catch (const json::exception &e) {
    throw std::invalid_argument(std::string("invalid program JSON: ") + e.what());
  }
}

} // namespace panoma::conic
