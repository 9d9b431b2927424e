#include "core/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace fbdsde {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) fail("unknown key '" + item.key() + "' in " + where);
  }
}

double get_number(const json& obj, const std::string& where) {
  if (!obj.is_number()) fail(where + ": expected a number");
  return obj.get<double>();
}

Vec parse_vec(const json& obj, const std::string& where) {
  if (!obj.is_array()) fail(where + ": expected an array of numbers");
  Vec out(obj.size());
  for (std::size_t i = 0; i < obj.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = get_number(obj[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

Mat parse_mat(const json& obj, const std::string& where) {
  if (!obj.is_array() || obj.empty()) fail(where + ": expected an array of rows");
  const std::size_t rows = obj.size();
  std::size_t cols = 0;
  Mat out;
  for (std::size_t i = 0; i < rows; ++i) {
    const Vec row = parse_vec(obj[i], where + "[" + std::to_string(i) + "]");
    if (i == 0) {
      cols = static_cast<std::size_t>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      fail(where + ": rows have unequal lengths");
    }
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

void assign_mat(Mat& target, const json& obj, const std::string& where) {
  const Mat parsed = parse_mat(obj, where);
  if (parsed.rows() != target.rows() || parsed.cols() != target.cols()) {
    fail(where + ": expected " + std::to_string(target.rows()) + " x " +
         std::to_string(target.cols()));
  }
  target = parsed;
}

void assign_vec(Vec& target, const json& obj, const std::string& where) {
  const Vec parsed = parse_vec(obj, where);
  if (parsed.size() != target.size()) {
    fail(where + ": expected length " + std::to_string(target.size()));
  }
  target = parsed;
}

void parse_affine(AffineBlocks& blocks, const json& obj, const std::string& where) {
  check_keys(obj, where, {"Ay", "AY", "Az", "AZ", "Ak", "Av", "By", "BY", "Bz", "BZ", "Bk", "Bv",
                          "c0", "c1"});
  struct Entry {
    const char* key;
    Mat* mat;
  };
  const Entry mats[] = {{"Ay", &blocks.Ay}, {"AY", &blocks.AY}, {"Az", &blocks.Az},
                        {"AZ", &blocks.AZ}, {"Ak", &blocks.Ak}, {"Av", &blocks.Av},
                        {"By", &blocks.By}, {"BY", &blocks.BY}, {"Bz", &blocks.Bz},
                        {"BZ", &blocks.BZ}, {"Bk", &blocks.Bk}, {"Bv", &blocks.Bv}};
  for (const Entry& e : mats) {
    if (obj.contains(e.key)) assign_mat(*e.mat, obj[e.key], where + "." + e.key);
  }
  if (obj.contains("c0")) assign_vec(blocks.c0, obj["c0"], where + ".c0");
  if (obj.contains("c1")) assign_vec(blocks.c1, obj["c1"], where + ".c1");
}

json dump_mat(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json dump_vec(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json dump_affine(const AffineBlocks& a) {
  json out = json::object();
  struct Entry {
    const char* key;
    const Mat* mat;
  };
  const Entry mats[] = {{"Ay", &a.Ay}, {"AY", &a.AY}, {"Az", &a.Az}, {"AZ", &a.AZ},
                        {"Ak", &a.Ak}, {"Av", &a.Av}, {"By", &a.By}, {"BY", &a.BY},
                        {"Bz", &a.Bz}, {"BZ", &a.BZ}, {"Bk", &a.Bk}, {"Bv", &a.Bv}};
  for (const Entry& e : mats) {
    if (!e.mat->isZero(0.0)) out[e.key] = dump_mat(*e.mat);
  }
  if (!a.c0.isZero(0.0)) out["c0"] = dump_vec(a.c0);
  if (!a.c1.isZero(0.0)) out["c1"] = dump_vec(a.c1);
  return out;
}

}  // namespace

LqProblem parse_lq_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) fail("top level must be an object");
  check_keys(root, "top level",
             {"name", "dims", "horizon", "jumps", "terminal", "x0", "controls", "lq", "cost"});

  Dimensions dims;
  if (root.contains("dims")) {
    const json& d = root["dims"];
    check_keys(d, "dims", {"n", "m", "l", "d", "r"});
    auto get_dim = [&](const char* key, int fallback) {
      if (!d.contains(key)) return fallback;
      const json& v = d[key];
      if (!v.is_number_integer()) fail(std::string("dims.") + key + ": expected an integer");
      return v.get<int>();
    };
    dims.n = get_dim("n", 1);
    dims.m = get_dim("m", 1);
    dims.l = get_dim("l", 1);
    dims.d = get_dim("d", 1);
    dims.r = get_dim("r", 1);
  }
  dims.validate();

  if (!root.contains("jumps")) fail("missing section 'jumps'");
  const json& jj = root["jumps"];
  check_keys(jj, "jumps", {"marks", "weights"});
  if (!jj.contains("marks") || !jj.contains("weights")) {
    fail("jumps: both 'marks' and 'weights' are required");
  }
  JumpMeasure jumps;
  const Vec marks = parse_vec(jj["marks"], "jumps.marks");
  const Vec weights = parse_vec(jj["weights"], "jumps.weights");
  jumps.marks.assign(marks.data(), marks.data() + marks.size());
  jumps.weights.assign(weights.data(), weights.data() + weights.size());
  jumps.validate();

  LqProblem lq = LqProblem::zero(dims, jumps);
  if (root.contains("name")) {
    if (!root["name"].is_string()) fail("name: expected a string");
    lq.name = root["name"].get<std::string>();
  }

  if (root.contains("horizon")) {
    const json& h = root["horizon"];
    check_keys(h, "horizon", {"T"});
    if (h.contains("T")) lq.T = get_number(h["T"], "horizon.T");
  }

  if (root.contains("terminal")) {
    const json& t = root["terminal"];
    check_keys(t, "terminal", {"c", "R", "xi"});
    if (t.contains("c")) lq.terminal.c = get_number(t["c"], "terminal.c");
    if (t.contains("R")) assign_mat(lq.terminal.R, t["R"], "terminal.R");
    if (t.contains("xi")) assign_vec(lq.terminal.xi, t["xi"], "terminal.xi");
  }

  if (root.contains("x0")) assign_vec(lq.x0, root["x0"], "x0");

  if (root.contains("controls")) {
    const json& c = root["controls"];
    check_keys(c, "controls", {"lo", "hi"});
    if (c.contains("lo")) assign_vec(lq.controls.lo, c["lo"], "controls.lo");
    if (c.contains("hi")) assign_vec(lq.controls.hi, c["hi"], "controls.hi");
  }

  if (root.contains("lq")) {
    const json& eq = root["lq"];
    check_keys(eq, "lq", {"b", "sigma", "phi", "f", "g"});
    if (eq.contains("b")) parse_affine(lq.b, eq["b"], "lq.b");
    if (eq.contains("sigma")) parse_affine(lq.sigma, eq["sigma"], "lq.sigma");
    if (eq.contains("f")) parse_affine(lq.f, eq["f"], "lq.f");
    if (eq.contains("g")) parse_affine(lq.g, eq["g"], "lq.g");
    if (eq.contains("phi")) {
      const json& ph = eq["phi"];
      check_keys(ph, "lq.phi", {"base", "rho", "kmark"});
      if (ph.contains("base")) parse_affine(lq.phi.base, ph["base"], "lq.phi.base");
      if (ph.contains("rho")) parse_affine(lq.phi.rho, ph["rho"], "lq.phi.rho");
      if (ph.contains("kmark")) assign_mat(lq.phi.kmark, ph["kmark"], "lq.phi.kmark");
    }
  }

  if (root.contains("cost")) {
    const json& c = root["cost"];
    check_keys(c, "cost", {"Qy", "QY", "Qz", "QZ", "Qk", "Qv", "ly", "lY", "lz", "lZ", "lk", "lv",
                           "lconst", "beta", "gamma"});
    struct MatEntry {
      const char* key;
      Mat* mat;
    };
    const MatEntry mats[] = {{"Qy", &lq.cost.Qy}, {"QY", &lq.cost.QY}, {"Qz", &lq.cost.Qz},
                             {"QZ", &lq.cost.QZ}, {"Qk", &lq.cost.Qk}, {"Qv", &lq.cost.Qv}};
    for (const MatEntry& e : mats) {
      if (c.contains(e.key)) assign_mat(*e.mat, c[e.key], std::string("cost.") + e.key);
    }
    struct VecEntry {
      const char* key;
      Vec* vec;
    };
    const VecEntry vecs[] = {{"ly", &lq.cost.ly}, {"lY", &lq.cost.lY}, {"lz", &lq.cost.lz},
                             {"lZ", &lq.cost.lZ}, {"lk", &lq.cost.lk}, {"lv", &lq.cost.lv}};
    for (const VecEntry& e : vecs) {
      if (c.contains(e.key)) assign_vec(*e.vec, c[e.key], std::string("cost.") + e.key);
    }
    if (c.contains("lconst")) lq.cost.lconst = get_number(c["lconst"], "cost.lconst");
    if (c.contains("beta")) {
      const json& b = c["beta"];
      check_keys(b, "cost.beta", {"Q", "l", "c"});
      if (b.contains("Q")) assign_mat(lq.cost.beta_Q, b["Q"], "cost.beta.Q");
      if (b.contains("l")) assign_vec(lq.cost.beta_l, b["l"], "cost.beta.l");
      if (b.contains("c")) lq.cost.beta_c = get_number(b["c"], "cost.beta.c");
    }
    if (c.contains("gamma")) {
      const json& g = c["gamma"];
      check_keys(g, "cost.gamma", {"Q", "l", "c"});
      if (g.contains("Q")) assign_mat(lq.cost.gamma_Q, g["Q"], "cost.gamma.Q");
      if (g.contains("l")) assign_vec(lq.cost.gamma_l, g["l"], "cost.gamma.l");
      if (g.contains("c")) lq.cost.gamma_c = get_number(g["c"], "cost.gamma.c");
    }
  }

  lq.validate();
  return lq;
}

LqProblem load_lq_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lq_config(buf.str());
}

std::string lq_config_to_json(const LqProblem& lq) {
  json root = json::object();
  root["name"] = lq.name;
  root["dims"] = {{"n", lq.dims.n}, {"m", lq.dims.m}, {"l", lq.dims.l},
                  {"d", lq.dims.d}, {"r", lq.dims.r}};
  root["horizon"] = {{"T", lq.T}};
  root["jumps"] = {{"marks", dump_vec(Eigen::Map<const Vec>(lq.jumps.marks.data(),
                                                            lq.jumps.count()))},
                   {"weights", dump_vec(Eigen::Map<const Vec>(lq.jumps.weights.data(),
                                                              lq.jumps.count()))}};
  root["terminal"] = {{"c", lq.terminal.c}, {"R", dump_mat(lq.terminal.R)},
                      {"xi", dump_vec(lq.terminal.xi)}};
  root["x0"] = dump_vec(lq.x0);
  root["controls"] = {{"lo", dump_vec(lq.controls.lo)}, {"hi", dump_vec(lq.controls.hi)}};

  json eq = json::object();
  if (json b = dump_affine(lq.b); !b.empty()) eq["b"] = b;
  if (json s = dump_affine(lq.sigma); !s.empty()) eq["sigma"] = s;
  if (json f = dump_affine(lq.f); !f.empty()) eq["f"] = f;
  if (json g = dump_affine(lq.g); !g.empty()) eq["g"] = g;
  json phi = json::object();
  if (json b = dump_affine(lq.phi.base); !b.empty()) phi["base"] = b;
  if (json r = dump_affine(lq.phi.rho); !r.empty()) phi["rho"] = r;
  if (!lq.phi.kmark.isZero(0.0)) phi["kmark"] = dump_mat(lq.phi.kmark);
  if (!phi.empty()) eq["phi"] = phi;
  if (!eq.empty()) root["lq"] = eq;

  json cost = json::object();
  struct MatEntry {
    const char* key;
    const Mat* mat;
  };
  const MatEntry mats[] = {{"Qy", &lq.cost.Qy}, {"QY", &lq.cost.QY}, {"Qz", &lq.cost.Qz},
                           {"QZ", &lq.cost.QZ}, {"Qk", &lq.cost.Qk}, {"Qv", &lq.cost.Qv}};
  for (const MatEntry& e : mats) {
    if (!e.mat->isZero(0.0)) cost[e.key] = dump_mat(*e.mat);
  }
  struct VecEntry {
    const char* key;
    const Vec* vec;
  };
  const VecEntry vecs[] = {{"ly", &lq.cost.ly}, {"lY", &lq.cost.lY}, {"lz", &lq.cost.lz},
                           {"lZ", &lq.cost.lZ}, {"lk", &lq.cost.lk}, {"lv", &lq.cost.lv}};
  for (const VecEntry& e : vecs) {
    if (!e.vec->isZero(0.0)) cost[e.key] = dump_vec(*e.vec);
  }
  if (lq.cost.lconst != 0.0) cost["lconst"] = lq.cost.lconst;
  json beta = json::object();
  if (!lq.cost.beta_Q.isZero(0.0)) beta["Q"] = dump_mat(lq.cost.beta_Q);
  if (!lq.cost.beta_l.isZero(0.0)) beta["l"] = dump_vec(lq.cost.beta_l);
  if (lq.cost.beta_c != 0.0) beta["c"] = lq.cost.beta_c;
  if (!beta.empty()) cost["beta"] = beta;
  json gamma = json::object();
  if (!lq.cost.gamma_Q.isZero(0.0)) gamma["Q"] = dump_mat(lq.cost.gamma_Q);
  if (!lq.cost.gamma_l.isZero(0.0)) gamma["l"] = dump_vec(lq.cost.gamma_l);
  if (lq.cost.gamma_c != 0.0) gamma["c"] = lq.cost.gamma_c;
  if (!gamma.empty()) cost["gamma"] = gamma;
  if (!cost.empty()) root["cost"] = cost;

  return root.dump(2) + "\n";
}

}  // namespace fbdsde
