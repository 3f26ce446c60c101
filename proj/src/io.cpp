#include "coarse/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "coarse/errors.hpp"

namespace coarse {

namespace {

using nlohmann::json;

Rat parse_rat(const json& value, const std::string& where) {
  if (value.is_string()) return rat_from_string(value.get<std::string>());
  if (value.is_number_integer()) return Rat(value.get<long long>());
  throw ParseError(where + ": expected a rational string like \"1/2\"");
}

StateSpace parse_states(const json& doc) {
  if (!doc.contains("states") || !doc["states"].is_array())
    throw ParseError("model needs a \"states\" array");
  std::vector<std::string> labels;
  for (const auto& s : doc["states"]) labels.push_back(s.get<std::string>());
  return StateSpace(labels);
}

std::vector<Rat> parse_px(const json& doc, const StateSpace& space) {
  std::vector<Rat> px(space.size(), Rat(0));
  if (!doc.contains("px") || !doc["px"].is_object()) throw ParseError("model needs a \"px\" object");
  for (const auto& [label, value] : doc["px"].items())
    px[space.require_index(label)] = parse_rat(value, "px." + label);
  return px;
}

uint64_t parse_set(const json& value, const StateSpace& space, const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected a list of state labels");
  uint64_t mask = 0;
  for (const auto& s : value) mask |= 1ull << space.require_index(s.get<std::string>());
  return mask;
}

CoarseDistribution parse_distribution(const json& doc) {
  StateSpace space = parse_states(doc);
  CoarseDistribution p(space);
  std::vector<Rat> px = parse_px(doc, space);
  for (size_t x = 0; x < space.size(); ++x) p.set_px(x, px[x]);
  if (!doc.contains("cond") || !doc["cond"].is_object())
    throw ParseError("distribution needs a \"cond\" object");
  for (const auto& [label, entries] : doc["cond"].items()) {
    size_t x = space.require_index(label);
    if (!entries.is_array()) throw ParseError("cond." + label + ": expected a list");
    for (const auto& entry : entries) {
      uint64_t mask = parse_set(entry.at("set"), space, "cond." + label + ".set");
      p.set_cond(x, mask, parse_rat(entry.at("p"), "cond." + label + ".p"));
    }
  }
  p.validate();
  return p;
}

SupportHypergraph parse_hypergraph(const json& doc) {
  StateSpace space = parse_states(doc);
  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    throw ParseError("hypergraph needs a \"nodes\" array");
  std::vector<SupportHypergraph::Node> nodes;
  for (const auto& entry : doc["nodes"]) {
    uint64_t extent = parse_set(entry.at("set"), space, "nodes.set");
    std::string name = entry.contains("name") ? entry["name"].get<std::string>()
                                              : subset_label(space, extent);
    nodes.push_back({name, extent});
  }
  SupportHypergraph h(space, std::move(nodes));
  h.validate();
  return h;
}

CoarseningVariable parse_coarsening_variable(const json& doc) {
  StateSpace space = parse_states(doc);
  if (!doc.contains("gamma") || !doc["gamma"].is_array())
    throw ParseError("coarsening variable needs a \"gamma\" array");
  std::vector<std::string> gamma;
  for (const auto& g : doc["gamma"]) gamma.push_back(g.get<std::string>());
  CoarseningVariable v(space, gamma);

  auto gamma_index = [&](const std::string& label) -> size_t {
    for (size_t g = 0; g < gamma.size(); ++g) {
      if (gamma[g] == label) return g;
    }
    throw ParseError("unknown gamma label '" + label + "'");
  };

  std::vector<Rat> px = parse_px(doc, space);
  if (!doc.contains("kernel") || !doc["kernel"].is_object())
    throw ParseError("coarsening variable needs a \"kernel\" object");
  for (const auto& [label, row] : doc["kernel"].items()) {
    size_t x = space.require_index(label);
    for (const auto& [glabel, value] : row.items())
      v.set_joint(x, gamma_index(glabel), px[x] * parse_rat(value, "kernel." + label + "." + glabel));
  }
  if (!doc.contains("f") || !doc["f"].is_object())
    throw ParseError("coarsening variable needs an \"f\" object");
  for (const auto& [label, row] : doc["f"].items()) {
    size_t x = space.require_index(label);
    for (const auto& [glabel, set] : row.items())
      v.set_map(x, gamma_index(glabel), parse_set(set, space, "f." + label + "." + glabel));
  }
  // f must be total.
  for (size_t x = 0; x < space.size(); ++x) {
    for (size_t g = 0; g < gamma.size(); ++g) {
      if (v.map(x, g) == 0)
        throw ParseError("f(" + space.label(x) + "," + gamma[g] + ") missing or empty");
    }
  }
  v.validate();
  return v;
}

MgdModel parse_mgd(const json& doc) {
  MgdModel m;
  m.space = parse_states(doc);
  m.px = parse_px(doc, m.space);
  if (!doc.contains("partitions") || !doc["partitions"].is_array())
    throw ParseError("mgd model needs a \"partitions\" array");
  for (const auto& part : doc["partitions"]) {
    std::vector<uint64_t> blocks;
    for (const auto& block : part) blocks.push_back(parse_set(block, m.space, "partitions"));
    m.partitions.push_back(std::move(blocks));
  }
  if (!doc.contains("lambda") || !doc["lambda"].is_array())
    throw ParseError("mgd model needs a \"lambda\" array");
  for (const auto& l : doc["lambda"]) m.lambda.push_back(parse_rat(l, "lambda"));
  m.validate();
  return m;
}

RmcModel parse_rmc(const json& doc) {
  RmcModel m;
  m.space = parse_states(doc);
  m.px = parse_px(doc, m.space);
  if (!doc.contains("tree") || !doc["tree"].is_array())
    throw ParseError("rmc model needs a \"tree\" array");
  for (const auto& entry : doc["tree"]) {
    uint64_t set = parse_set(entry.at("set"), m.space, "tree.set");
    RmcModel::Node node;
    node.stop = entry.contains("stop") ? parse_rat(entry["stop"], "tree.stop") : Rat(0);
    if (entry.contains("splits")) {
      for (const auto& split : entry["splits"]) {
        node.splits.emplace_back(parse_set(split.at("take"), m.space, "tree.splits.take"),
                                 parse_rat(split.at("p"), "tree.splits.p"));
      }
    }
    m.tree[set] = std::move(node);
  }
  m.validate();
  return m;
}

UniformNoiseModel parse_noise(const json& doc) {
  UniformNoiseModel m;
  m.space = parse_states(doc);
  m.px = parse_px(doc, m.space);
  if (!doc.contains("steps") || !doc["steps"].is_array())
    throw ParseError("noise model needs a \"steps\" array");
  for (const auto& p : doc["steps"]) m.steps.push_back(parse_rat(p, "steps"));
  m.validate();
  return m;
}

PtModel parse_pt(const json& doc) {
  PtModel m;
  m.space = parse_states(doc);
  m.px = parse_px(doc, m.space);
  if (!doc.contains("proposal") || !doc["proposal"].is_array())
    throw ParseError("pt model needs a \"proposal\" array");
  for (const auto& entry : doc["proposal"]) {
    uint64_t mask = parse_set(entry.at("set"), m.space, "proposal.set");
    m.proposal[mask] = parse_rat(entry.at("p"), "proposal.p");
  }
  m.validate();
  return m;
}

TabularSequentialModel parse_tabular(const json& doc) {
  StateSpace space = parse_states(doc);
  std::vector<Rat> px = parse_px(doc, space);
  if (!doc.contains("gammas") || !doc["gammas"].is_array())
    throw ParseError("tabular model needs a \"gammas\" array");
  std::vector<std::vector<std::string>> gammas;
  for (const auto& g : doc["gammas"]) {
    std::vector<std::string> labels;
    for (const auto& v : g) labels.push_back(v.get<std::string>());
    gammas.push_back(std::move(labels));
  }
  TabularSequentialModel m(space, px, gammas);

  auto gamma_index = [&](size_t i, const std::string& label) -> size_t {
    for (size_t v = 0; v < gammas[i].size(); ++v) {
      if (gammas[i][v] == label) return v;
    }
    throw ParseError("unknown gamma value '" + label + "' for variable " + std::to_string(i + 1));
  };

  if (!doc.contains("kernels") || !doc["kernels"].is_array() || doc["kernels"].size() != gammas.size())
    throw ParseError("tabular model needs one kernel per variable");
  for (size_t i = 0; i < gammas.size(); ++i) {
    const json& kernel = doc["kernels"][i];
    if (kernel.contains("const_p")) {
      std::vector<Rat> row;
      for (const auto& p : kernel["const_p"]) row.push_back(parse_rat(p, "kernels.const_p"));
      for (size_t h = 0; h < m.history_count(i); ++h) m.set_kernel_row(i, h, row);
    } else if (kernel.contains("rows")) {
      std::vector<bool> seen(m.history_count(i), false);
      for (const auto& row : kernel["rows"]) {
        size_t x = space.require_index(row.at("x").get<std::string>());
        std::vector<size_t> prefix;
        if (row.contains("given")) {
          const auto& given = row["given"];
          for (size_t j = 0; j < given.size(); ++j)
            prefix.push_back(gamma_index(j, given[j].get<std::string>()));
        }
        if (prefix.size() != i) throw ParseError("kernel row \"given\" must list the previous values");
        std::vector<Rat> values;
        for (const auto& p : row.at("p")) values.push_back(parse_rat(p, "kernels.rows.p"));
        size_t h = m.history_rank(x, prefix);
        m.set_kernel_row(i, h, std::move(values));
        seen[h] = true;
      }
      for (size_t h = 0; h < m.history_count(i); ++h) {
        if (!seen[h])
          throw ParseError("kernel " + std::to_string(i + 1) + " is missing a row (history " +
                           std::to_string(h) + "); tables must be full");
      }
    } else {
      throw ParseError("kernel " + std::to_string(i + 1) + " needs \"const_p\" or \"rows\"");
    }
  }

  if (!doc.contains("f") || !doc["f"].is_array()) throw ParseError("tabular model needs an \"f\" array");
  std::vector<std::vector<bool>> seen(space.size(),
                                      std::vector<bool>(m.assignment_count(), false));
  for (const auto& entry : doc["f"]) {
    size_t x = space.require_index(entry.at("x").get<std::string>());
    std::vector<size_t> values;
    const auto& g = entry.at("g");
    if (g.size() != gammas.size()) throw ParseError("f entry lists the wrong number of G values");
    for (size_t i = 0; i < gammas.size(); ++i) values.push_back(gamma_index(i, g[i].get<std::string>()));
    size_t rank = m.assignment_rank(values);
    m.set_map(x, rank, parse_set(entry.at("set"), space, "f.set"));
    seen[x][rank] = true;
  }
  for (size_t x = 0; x < space.size(); ++x) {
    for (size_t r = 0; r < m.assignment_count(); ++r) {
      if (!seen[x][r]) throw ParseError("f table incomplete at state " + space.label(x));
    }
  }
  m.validate();
  return m;
}

BernoulliModel parse_bernoulli(const json& doc) {
  StateSpace space = parse_states(doc);
  std::vector<Rat> px = parse_px(doc, space);
  if (!doc.contains("vars") || !doc["vars"].is_array())
    throw ParseError("bernoulli model needs a \"vars\" array");
  std::vector<BernoulliModel::Var> vars;
  for (const auto& v : doc["vars"]) {
    BernoulliModel::Var var;
    var.name = v.contains("name") ? v["name"].get<std::string>()
                                  : "G" + std::to_string(vars.size() + 1);
    for (const auto& label : v.at("values")) var.values.push_back(label.get<std::string>());
    for (const auto& p : v.at("p")) var.marginal.push_back(parse_rat(p, "vars.p"));
    vars.push_back(std::move(var));
  }
  BernoulliModel b(space, px, vars);

  if (!doc.contains("f") || !doc["f"].is_array()) throw ParseError("bernoulli model needs an \"f\" array");
  std::vector<std::vector<bool>> seen(space.size(),
                                      std::vector<bool>(b.assignment_count(), false));
  for (const auto& entry : doc["f"]) {
    size_t x = space.require_index(entry.at("x").get<std::string>());
    const auto& g = entry.at("g");
    if (g.size() != vars.size()) throw ParseError("f entry lists the wrong number of G values");
    std::vector<size_t> values;
    for (size_t i = 0; i < vars.size(); ++i) {
      const std::string label = g[i].get<std::string>();
      size_t v = 0;
      while (v < vars[i].values.size() && vars[i].values[v] != label) ++v;
      if (v == vars[i].values.size())
        throw ParseError("unknown value '" + label + "' for variable " + vars[i].name);
      values.push_back(v);
    }
    size_t rank = b.assignment_rank(values);
    b.set_map(x, rank, parse_set(entry.at("set"), space, "f.set"));
    seen[x][rank] = true;
  }
  for (size_t x = 0; x < space.size(); ++x) {
    for (size_t r = 0; r < b.assignment_count(); ++r) {
      if (!seen[x][r]) throw ParseError("f table incomplete at state " + space.label(x));
    }
  }
  b.validate();
  return b;
}

}  // namespace

ParsedModel parse_model_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("kind"))
      throw ParseError("model document needs a \"kind\" field");
    std::string kind = doc["kind"].get<std::string>();
    if (kind == "distribution") return {kind, parse_distribution(doc)};
    if (kind == "hypergraph") return {kind, parse_hypergraph(doc)};
    if (kind == "coarsening_variable") return {kind, parse_coarsening_variable(doc)};
    if (kind == "mgd") return {kind, parse_mgd(doc)};
    if (kind == "rmc") return {kind, parse_rmc(doc)};
    if (kind == "noise") return {kind, parse_noise(doc)};
    if (kind == "pt") return {kind, parse_pt(doc)};
    if (kind == "tabular") return {kind, parse_tabular(doc)};
    if (kind == "bernoulli") return {kind, parse_bernoulli(doc)};
    throw ParseError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

ParsedModel parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model_text(buffer.str(), path);
}

std::string distribution_to_json(const CoarseDistribution& p) {
  json doc;
  doc["kind"] = "distribution";
  doc["states"] = p.space().labels();
  json px = json::object();
  for (size_t x = 0; x < p.space().size(); ++x) px[p.space().label(x)] = rat_to_string(p.px(x));
  doc["px"] = px;
  json cond = json::object();
  for (size_t x = 0; x < p.space().size(); ++x) {
    if (p.px(x) == 0) continue;
    json entries = json::array();
    for (const auto& [mask, prob] : p.cond_row(x)) {
      if (prob == 0) continue;
      json labels = json::array();
      for (size_t i = 0; i < p.space().size(); ++i) {
        if ((mask >> i) & 1) labels.push_back(p.space().label(i));
      }
      entries.push_back({{"set", labels}, {"p", rat_to_string(prob)}});
    }
    cond[p.space().label(x)] = entries;
  }
  doc["cond"] = cond;
  return doc.dump(2);
}

std::string bernoulli_to_json(const BernoulliModel& b) {
  json doc;
  doc["kind"] = "bernoulli";
  doc["states"] = b.space().labels();
  json px = json::object();
  for (size_t x = 0; x < b.space().size(); ++x) px[b.space().label(x)] = rat_to_string(b.px()[x]);
  doc["px"] = px;
  json vars = json::array();
  for (const auto& v : b.vars()) {
    json p = json::array();
    for (const Rat& r : v.marginal) p.push_back(rat_to_string(r));
    vars.push_back({{"name", v.name}, {"values", v.values}, {"p", p}});
  }
  doc["vars"] = vars;
  json f = json::array();
  for (size_t x = 0; x < b.space().size(); ++x) {
    for (size_t rank = 0; rank < b.assignment_count(); ++rank) {
      std::vector<size_t> values = b.assignment_values(rank);
      json g = json::array();
      for (size_t i = 0; i < values.size(); ++i) g.push_back(b.vars()[i].values[values[i]]);
      json labels = json::array();
      uint64_t mask = b.map(x, rank);
      for (size_t i = 0; i < b.space().size(); ++i) {
        if ((mask >> i) & 1) labels.push_back(b.space().label(i));
      }
      f.push_back({{"x", b.space().label(x)}, {"g", g}, {"set", labels}});
    }
  }
  doc["f"] = f;
  return doc.dump(2);
}

CoarseDistribution induced_of(const ParsedModel& parsed) {
  return std::visit(
      [](const auto& model) -> CoarseDistribution {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, CoarseDistribution>) {
          return model;
        } else if constexpr (std::is_same_v<T, SupportHypergraph>) {
          throw ValidationError("a hypergraph has no induced distribution; use realize");
        } else if constexpr (std::is_same_v<T, CoarseningVariable>) {
          return model.induced_distribution();
        } else if constexpr (std::is_same_v<T, MgdModel>) {
          return induce_mgd(model);
        } else if constexpr (std::is_same_v<T, RmcModel>) {
          return induce_rmc(model);
        } else if constexpr (std::is_same_v<T, UniformNoiseModel>) {
          return induce_noise(model);
        } else if constexpr (std::is_same_v<T, PtModel>) {
          return induce_pt(model);
        } else if constexpr (std::is_same_v<T, TabularSequentialModel>) {
          return induce_tabular(model);
        } else {
          return model.induce();
        }
      },
      parsed.model);
}

}  // namespace coarse
