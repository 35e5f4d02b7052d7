#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "knva/atlas.hpp"
#include "knva/distr.hpp"
#include "knva/errors.hpp"
#include "knva/tables.hpp"
#include "knva/vertex.hpp"

namespace knva::cli {

namespace {

const char* const kSuites[] = {"duality", "bands", "vacuum", "translation", "locality", "wick", "affine"};

struct Options {
  // sources
  std::string atlas_path, tables_path, load_path;
  // geometry overrides
  std::optional<int> genus;
  std::string tau = "0+1i", p_plus = "0.17+0.31i", p_minus = "-0.2317+0.1123i";
  std::string window, lambdas;
  std::optional<int> trunc, k_max;
  std::optional<unsigned> precision;
  std::optional<double> tolerance;
  // outputs
  std::string out_path, report_path, format = "human";
  // verify
  std::vector<std::string> suites{"all"};
  int max_degree = 3;
  std::string range = "4", affine_range = "2.5", lie = "sl2";
  // field
  std::string state, coeff, apply_state;
};

// "6.5", "13/2", "4" -> doubled, rounded to the nearest half-integer step.
int parse_half(const std::string& text, const std::string& what) {
  try {
    size_t slash = text.find('/');
    double v = slash == std::string::npos ? std::stod(text)
                                          : std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
    double d = 2 * v;
    if (std::abs(d - std::round(d)) > 1e-9) throw ConfigError(what + " '" + text + "' is not a multiple of 1/2");
    return static_cast<int>(std::lround(d));
  } catch (const std::logic_error&) {
    throw ConfigError(what + " '" + text + "' is not a number");
  }
}

std::vector<int> parse_lambdas(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoi(item));
        continue;
      }
      int lo = std::stoi(item.substr(0, colon)), hi = std::stoi(item.substr(colon + 1));
      for (int l = lo; l <= hi; ++l) out.push_back(l);
    } catch (const std::logic_error&) {
      throw ConfigError("lambdas '" + text + "': expected a list like -1,0,1,2 or -2:3");
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<unsigned> env_precision() {
  const char* v = std::getenv("KNVA_PRECISION");
  if (!v || !*v) return std::nullopt;
  try {
    size_t used = 0;
    long p = std::stol(v, &used);
    if (used != std::string(v).size() || p <= 0) throw std::invalid_argument("");
    return static_cast<unsigned>(p);
  } catch (const std::logic_error&) {
    throw ConfigError(std::string("KNVA_PRECISION='") + v + "' is not a positive integer");
  }
}

// Lambdas that cover every table the vertex checks need for fields of weight <= w.
std::vector<int> lambdas_for_weight(int w) {
  std::vector<int> out;
  for (int l = std::min(-1, 1 - w); l <= std::max(2, w); ++l) out.push_back(l);
  return out;
}

AtlasConfig atlas_config(const Options& o, int default_weight) {
  AtlasConfig c;
  c.genus = o.genus.value_or(0);
  if (c.genus >= 2) throw ConfigError("genus >= 2 requires --load (atlases are imported from files)");
  c.mode = c.genus == 0 ? ScalarMode::exact : ScalarMode::complex;
  c.window = o.window.empty() ? (c.genus == 0 ? 40 : 25) : parse_half(o.window, "window");
  c.trunc = o.trunc.value_or(AtlasConfig::min_trunc(c.window));
  c.lambdas = o.lambdas.empty() ? lambdas_for_weight(default_weight) : parse_lambdas(o.lambdas);
  if (auto p = o.precision ? o.precision : env_precision()) c.precision = *p;
  if (o.tolerance) c.tolerance = *o.tolerance;
  if (c.genus == 1) {
    c.tau = o.tau;
    c.p_plus = o.p_plus;
    c.p_minus = o.p_minus;
  }
  c.validate();
  return c;
}

BasisAtlas obtain_atlas(const Options& o, int default_weight) {
  if (!o.load_path.empty()) return load_atlas(o.load_path);
  if (!o.atlas_path.empty()) return load_atlas(o.atlas_path);
  return build_atlas(atlas_config(o, default_weight));
}

StructureTables obtain_tables(const Options& o, const BasisAtlas& atlas) {
  if (!o.tables_path.empty()) return load_tables(o.tables_path);
  TablesConfig tc = default_tables_config(atlas);
  if (o.k_max) tc.k_max = *o.k_max;
  return compute_tables(atlas, tc);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

// ---- reporting ----

class Reporter {
 public:
  Reporter(const Options& o, std::ostream& out) : structured_(o.format == "structured"), out_(out) {}

  void add(const std::string& suite, const CheckReport& r) {
    json j = r.to_json();
    j["suite"] = suite;
    lines_.push_back(j.dump());
    passed_ = passed_ && r.passed;
    if (structured_) {
      out_ << lines_.back() << "\n";
      return;
    }
    out_ << "[" << suite << "] " << r.summary() << "\n";
    for (const auto& f : r.findings) out_ << "    " << f << "\n";
  }
  bool passed() const { return passed_; }
  std::string jsonl() const {
    std::string s;
    for (const auto& l : lines_) s += l + "\n";
    return s;
  }

 private:
  bool structured_;
  std::ostream& out_;
  std::vector<std::string> lines_;
  bool passed_ = true;
};

// A check that throws a window error still yields a (failed) record.
void run_check(Reporter& rep, const std::string& suite, const std::string& name,
               const std::function<CheckReport()>& f) {
  try {
    rep.add(suite, f());
  } catch (const WindowError& e) {
    CheckReport r(name, false, 0);
    r.fail(std::string("window overflow: ") + e.what());
    rep.add(suite, r);
  }
}

std::vector<FieldSpec> fields_up_to(int degree, bool with_identity) {
  std::vector<FieldSpec> out;
  for (const Monomial& m : monomials_up_to(degree))
    if (with_identity || !m.is_vacuum()) out.push_back(Y(m));
  return out;
}

void suite_duality(Reporter& rep, const BasisAtlas& atlas) {
  run_check(rep, "duality", "duality", [&] { return verify_duality(atlas); });
  if (atlas.genus() == 1) run_check(rep, "duality", "periodicity", [&] { return check_periodicity(atlas); });
}

void suite_bands(Reporter& rep, const BasisAtlas& atlas, const StructureTables& t) {
  run_check(rep, "bands", "bands", [&] { return check_bands(t); });
  run_check(rep, "bands", "expansions", [&] { return check_expansions(t, atlas); });
  for (int l : atlas.config.lambdas)
    if (atlas.config.has_lambda(1 - l))
      run_check(rep, "bands", "delta partition", [&] { return check_delta_partition(atlas, l); });
}

void suite_vacuum(Reporter& rep, FieldContext& ctx, int max_degree) {
  for (const FieldSpec& f : fields_up_to(max_degree, true))
    run_check(rep, "vacuum", "vacuum " + f.str(), [&] { return check_vacuum(ctx, f); });
}

void suite_translation(Reporter& rep, FieldContext& ctx, int max_degree, int range2) {
  auto states = basis_states(ctx.kind(), max_degree);
  for (const FieldSpec& f : fields_up_to(max_degree, true))
    run_check(rep, "translation", "translation " + f.str(),
              [&] { return check_translation(ctx, f, states, range2); });
}

void suite_locality(Reporter& rep, FieldContext& ctx, int max_degree, int range2) {
  auto fields = fields_up_to(max_degree, false);
  auto states = basis_states(ctx.kind(), std::min(max_degree, 2));
  for (size_t i = 0; i < fields.size(); ++i)
    for (size_t j = i; j < fields.size(); ++j)
      run_check(rep, "locality", "locality", [&] {
        return check_locality(ctx, fields[i], fields[j], states, range2);
      });
  if (ctx.genus() == 0) return;
  for (int k = 0; k <= 2; ++k)
    for (int h = k; h <= 2; ++h)
      run_check(rep, "locality", "annihilator commutation",
                [&] { return check_annihilator_commutation(ctx, k, h, states, range2); });
  run_check(rep, "locality", "double bracket",
            [&] { return check_double_bracket(ctx, 1, 0, 1, states, range2); });
}

void suite_wick(Reporter& rep, FieldContext& ctx, int max_degree, int range2) {
  std::vector<FieldSpec> fields;
  for (const FieldSpec& f : fields_up_to(max_degree, false))
    if (f.weight() <= 2) fields.push_back(f);
  auto states = basis_states(ctx.kind(), max_degree);
  for (const FieldSpec& a : fields)
    for (const FieldSpec& b : fields)
      run_check(rep, "wick", "wick", [&] { return check_wick(ctx, a, b, states, range2); });
}

void suite_affine(Reporter& rep, const BasisAtlas& atlas, const StructureTables& t,
                  const LieAlgebraData& lie, int range2) {
  run_check(rep, "affine", "dP delta", [&] { return check_dP_delta(atlas, t); });
  run_check(rep, "affine", "affine Jacobi", [&] { return check_affine_jacobi(t, lie, range2); });
  run_check(rep, "affine", "affine antisymmetry", [&] { return check_affine_antisymmetry(t, lie, range2); });
  run_check(rep, "affine", "bracket corollary", [&] { return check_bracket_corollary(t, lie, range2, &atlas); });
}

// ---- subcommands ----

int cmd_atlas(const Options& o, std::ostream& out) {
  BasisAtlas atlas = o.load_path.empty() ? build_atlas(atlas_config(o, 2)) : load_atlas(o.load_path);
  CheckReport r = verify_duality(atlas);
  if (!o.out_path.empty()) save_atlas(atlas, o.out_path);
  if (o.format == "structured") out << r.to_json().dump() << "\n";
  else out << "genus " << atlas.genus() << ", window " << index_str(atlas.config.window) << ", "
           << atlas.sections.size() << " sections\n" << r.summary() << "\n";
  return r.passed ? kExitPass : kExitFail;
}

int cmd_tables(const Options& o, std::ostream& out) {
  BasisAtlas atlas = obtain_atlas(o, 2);
  StructureTables t = obtain_tables(o, atlas);
  if (!o.out_path.empty()) save_tables(t, o.out_path);
  json s = band_summary(t);
  out << (o.format == "structured" ? s.dump() : s.dump(2)) << "\n";
  return kExitPass;
}

int cmd_verify(const Options& o, std::ostream& out) {
  std::vector<std::string> suites;
  for (const auto& s : o.suites) {
    if (s == "all") {
      suites.assign(std::begin(kSuites), std::end(kSuites));
      break;
    }
    if (std::find(std::begin(kSuites), std::end(kSuites), s) == std::end(kSuites))
      throw ConfigError("unknown suite '" + s + "'");
    suites.push_back(s);
  }
  if (o.max_degree < 0) throw ConfigError("--max-degree must be non-negative");
  LieAlgebraData lie = lie_by_name(o.lie);
  const int range2 = parse_half(o.range, "range"), affine2 = parse_half(o.affine_range, "affine range");
  BasisAtlas atlas = obtain_atlas(o, std::max(o.max_degree, 1));
  StructureTables t = obtain_tables(o, atlas);
  FieldContext ctx(t);
  Reporter rep(o, out);
  for (const auto& s : suites) {
    if (s == "duality") suite_duality(rep, atlas);
    if (s == "bands") suite_bands(rep, atlas, t);
    if (s == "vacuum") suite_vacuum(rep, ctx, o.max_degree);
    if (s == "translation") suite_translation(rep, ctx, o.max_degree, range2);
    if (s == "locality") suite_locality(rep, ctx, o.max_degree, range2);
    if (s == "wick") suite_wick(rep, ctx, o.max_degree, range2);
    if (s == "affine") suite_affine(rep, atlas, t, lie, affine2);
  }
  if (!o.report_path.empty()) write_file(o.report_path, rep.jsonl());
  if (o.format != "structured") out << (rep.passed() ? "all checks passed" : "some checks failed") << "\n";
  return rep.passed() ? kExitPass : kExitFail;
}

int cmd_field(const Options& o, std::ostream& out) {
  if (o.state.empty()) throw ConfigError("field needs --state");
  FieldSpec spec = Y(parse_monomial(o.state));
  int weight = std::max(spec.weight(), 1);
  BasisAtlas atlas = obtain_atlas(o, weight);
  StructureTables t = obtain_tables(o, atlas);
  FieldContext ctx(t);
  const int g = t.genus;
  json j = {{"field", spec.str()}};
  std::vector<int> idx;
  if (!o.coeff.empty()) {
    idx.push_back(parse_index(o.coeff, g));
    if (!t.in_window(idx.back())) throw WindowError("index " + o.coeff + " lies outside the window");
  } else {
    for (int n2 = vacuum_index(g, spec.weight()); n2 >= vacuum_index(g, spec.weight()) - 8; n2 -= 2) idx.push_back(n2);
  }
  std::optional<FockVector> v;
  if (!o.apply_state.empty()) v = ctx.fock().parse_state(o.apply_state);
  const int budget = v ? (v->is_zero() ? 0 : degree(*v)) : o.max_degree;
  std::string text;
  json coeffs = json::array();
  for (int n2 : idx) {
    json c = {{"index", index_str(n2)}};
    if (v) {
      FockVector w = ctx.apply(spec, n2, *v);
      c["result"] = w.to_json();
      text += spec.str() + "_{" + index_str(n2) + "} " + o.apply_state + " = " + w.str() + "\n";
    } else {
      const CoefficientOperator& op = ctx.coefficient(spec, n2, budget);
      c["operator"] = op.to_json(g);
      text += spec.str() + "_{" + index_str(n2) + "} = " + op.str(g) + "\n";
    }
    coeffs.push_back(c);
  }
  j["coefficients"] = coeffs;
  j["budget"] = budget;
  if (o.format == "structured") out << j.dump() << "\n";
  else out << text;
  return kExitPass;
}

void add_source_options(CLI::App* c, Options& o) {
  c->add_option("--atlas", o.atlas_path, "atlas file to load");
  c->add_option("--tables", o.tables_path, "tables file to load");
  c->add_option("--genus", o.genus, "genus (0 or 1; larger genera need --load)");
  c->add_option("--tau", o.tau, "genus-1 period, e.g. 0+1i");
  c->add_option("--p-plus", o.p_plus, "genus-1 point P+");
  c->add_option("--p-minus", o.p_minus, "genus-1 point P-");
  c->add_option("--window", o.window, "largest |n|, e.g. 12 or 6.5");
  c->add_option("--trunc", o.trunc, "highest kept exponent");
  c->add_option("--lambdas", o.lambdas, "weights, e.g. -1,0,1,2 or -2:3");
  c->add_option("--precision", o.precision, "decimal digits (default KNVA_PRECISION or 60)");
  c->add_option("--tolerance", o.tolerance, "pass tolerance (default 10^(-precision/2))");
  c->add_option("--k-max", o.k_max, "highest derivative order tabulated in q");
  c->add_option("--format", o.format, "human or structured")->check(CLI::IsMember({"human", "structured"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Krichever-Novikov bases, residue tables and the higher-genus Heisenberg vertex algebra"};
  app.require_subcommand(1);

  CLI::App* atlas = app.add_subcommand("atlas", "build or load an atlas and check duality");
  add_source_options(atlas, o);
  atlas->add_option("--load", o.load_path, "import an atlas file (any genus)");
  atlas->add_option("--out", o.out_path, "write the atlas here");

  CLI::App* tables = app.add_subcommand("tables", "compute all residue tables");
  add_source_options(tables, o);
  tables->add_option("--load", o.load_path, "import an atlas file (any genus)");
  tables->add_option("--out", o.out_path, "write the tables here");

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  add_source_options(verify, o);
  verify->add_option("--load", o.load_path, "import an atlas file (any genus)");
  verify->add_option("--suite", o.suites, "duality|bands|vacuum|translation|locality|wick|affine|all")
      ->delimiter(',');
  verify->add_option("--max-degree", o.max_degree, "largest state degree in the vertex suites");
  verify->add_option("--range", o.range, "largest |n| of tested coefficients");
  verify->add_option("--affine-range", o.affine_range, "largest |n| in the affine suite");
  verify->add_option("--lie", o.lie, "abelian, sl2 or a Lie algebra file");
  verify->add_option("--report", o.report_path, "write one JSON record per check here");

  CLI::App* field = app.add_subcommand("field", "print coefficients of the field of a state");
  add_source_options(field, o);
  field->add_option("--load", o.load_path, "import an atlas file (any genus)");
  field->add_option("--state", o.state, "state literal, e.g. a[-2]a[-1]|0>");
  field->add_option("--coeff", o.coeff, "coefficient index, e.g. g/2-1 or -3/2");
  field->add_option("--apply", o.apply_state, "apply the coefficient to this state");
  field->add_option("--max-degree", o.max_degree, "degree budget of printed operators");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (atlas->parsed()) return cmd_atlas(o, out);
    if (tables->parsed()) return cmd_tables(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    return cmd_field(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
  } catch (const WindowError& e) {
    err << "window error: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitConfig;
}

}  // namespace knva::cli
