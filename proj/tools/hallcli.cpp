#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hall/hall_c.h"

namespace {

constexpr int kExitUsage = 2;

struct Config {
  std::string instance = "vect_fq";
  int q = 2;
  std::string quiver_path, duality_path, stability_path;
  std::string cap;
  int m = 1;
  int degree_cap = 10;
  std::string format = "json";
  int jobs = 1;
  std::uint64_t budget = 0;
  std::string out;
  std::string left, right, target, key;
  std::vector<int> primes{2, 3, 5};
  int holdout = 7;
  std::string sub;
  bool corrupt = false, module = false, reconcile = false, certify = false, span = false;
};

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Usage(std::string("cannot read ") + what + " file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string need(const std::string& value, const char* flag) {
  if (value.empty()) throw Usage(std::string("missing ") + flag);
  return value;
}

int to_int(const std::string& s, const char* flag) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Usage(std::string(flag) + " expects an integer, got " + s);
  }
}

class Runner {
 public:
  explicit Runner(const Config& c) : c_(c) {}
  ~Runner() {
    if (mod_) hall_module_free(mod_);
    if (inst_) hall_instance_free(inst_);
  }

  hall_format format() const { return c_.format == "csv" ? HALL_FORMAT_CSV : HALL_FORMAT_JSON; }

  hall_instance* instance() {
    if (inst_) return inst_;
    std::string quiver = c_.quiver_path.empty() ? "" : slurp(c_.quiver_path, "quiver");
    last_ = hall_instance_create(c_.instance.c_str(), c_.q, quiver.empty() ? nullptr : quiver.c_str(), &inst_);
    if (last_ != HALL_OK) throw Failed{last_};
    return inst_;
  }

  std::string duality() const { return slurp(need(c_.duality_path, "--duality"), "duality"); }

  hall_module* module() {
    if (mod_) return mod_;
    auto d = duality();
    last_ = hall_module_create(instance(), d.c_str(), need(c_.cap, "--cap").c_str(), &mod_);
    if (last_ != HALL_OK) throw Failed{last_};
    return mod_;
  }

  // Calls f, writes its report, and returns the exit status.
  int report(const std::function<hall_status(char**)>& f) {
    char* text = nullptr;
    hall_status st = f(&text);
    if (text) {
      write(text);
      hall_free_string(text);
    }
    return finish(st);
  }

  struct Failed {
    hall_status status;
  };

  static int finish(hall_status st) {
    switch (st) {
      case HALL_OK:
        return 0;
      case HALL_CHECK_FAILED:
        return 1;
      case HALL_INPUT_ERROR:
        std::cerr << "error: " << hall_last_error() << "\n";
        return kExitUsage;
      case HALL_RESOURCE_ERROR:
        std::cerr << "resource limit: " << hall_last_error() << "\n";
        return 3;
      default:
        std::cerr << "check failed: " << hall_last_error() << "\n";
        return 1;
    }
  }

 private:
  void write(const char* text) const {
    if (c_.out.empty()) {
      std::fputs(text, stdout);
      return;
    }
    std::ofstream f(c_.out, std::ios::binary);
    if (!f) throw Usage("cannot write " + c_.out);
    f << text;
  }

  const Config& c_;
  hall_instance* inst_ = nullptr;
  hall_module* mod_ = nullptr;
  hall_status last_ = HALL_OK;
};

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--instance", c.instance, "vect_fq, vect_f1, rep_fq, rep_f1 or nil_jordan_fq");
  sub->add_option("--q", c.q, "field order");
  sub->add_option("--quiver", c.quiver_path, "quiver JSON file");
  sub->add_option("--cap", c.cap, "size cap, e.g. 2 or (1,1); weight cap for coha subcommands");
  sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--budget", c.budget, "enumeration ceiling, 0 for none");
  sub->add_option("--out", c.out, "write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Hall algebras of finitary proto-exact categories, Hall modules and CoHA tools"};
  app.require_subcommand(1);

  auto* mult = app.add_subcommand("mult", "single product (--left, --right) or table below --cap");
  add_common(mult, c);
  mult->add_option("--left", c.left);
  mult->add_option("--right", c.right);

  auto* comult = app.add_subcommand("comult", "incidence coproduct of a basis element");
  add_common(comult, c);
  comult->add_option("--key", c.key)->required();

  auto* hallpoly = app.add_subcommand("hallpoly", "structure constant as a polynomial in q");
  add_common(hallpoly, c);
  hallpoly->add_option("--left", c.left)->required();
  hallpoly->add_option("--right", c.right)->required();
  hallpoly->add_option("--target", c.target)->required();
  hallpoly->add_option("--primes", c.primes)->delimiter(',');
  hallpoly->add_option("--holdout", c.holdout);

  auto* seg = app.add_subcommand("check2segal", "2-Segal and unitality of the S-construction");
  add_common(seg, c);
  seg->add_flag("--corrupt", c.corrupt, "duplicate a block of X_3 first; the check must fail");

  auto* culf = app.add_subcommand("checkculf", "certificates for a full-subcategory inclusion");
  add_common(culf, c);
  culf->add_option("--sub", c.sub, "zero:V or even:V")->required();

  auto* mact = app.add_subcommand("module-act", "Hall module of a duality");
  add_common(mact, c);
  mact->add_option("--duality", c.duality_path, "duality JSON file");
  mact->add_option("--left", c.left, "algebra key");
  mact->add_option("--right", c.right, "module key");
  mact->add_flag("--reconcile", c.reconcile, "naive vs weighted vs closed-form constants");
  mact->add_flag("--certify", c.certify, "relative 2-Segal certificate of the isotropic-flag construction");

  auto* framed = app.add_subcommand("framed", "stable-framed module");
  add_common(framed, c);
  framed->add_option("--stability", c.stability_path, "stability JSON file")->required();

  auto* cmult = app.add_subcommand("coha-mult", "shuffle product, or the module action with --module");
  add_common(cmult, c);
  cmult->add_option("--m", c.m, "loop count")->check(CLI::NonNegativeNumber);
  cmult->add_option("--left", c.left)->required();
  cmult->add_option("--right", c.right)->required();
  cmult->add_flag("--module", c.module);

  auto* dt = app.add_subcommand("coha-dt", "V^prim multiplicities by weight and degree");
  add_common(dt, c);
  dt->add_option("--m", c.m, "loop count")->check(CLI::NonNegativeNumber);
  dt->add_option("--degree-cap", c.degree_cap);

  auto* wp = app.add_subcommand("coha-wprim", "M / (H_+ M) by weight and degree");
  add_common(wp, c);
  wp->add_option("--m", c.m, "loop count")->check(CLI::NonNegativeNumber);
  wp->add_option("--degree-cap", c.degree_cap);

  auto* rel = app.add_subcommand("relations", "relations among words in the simples, or their span with --span");
  add_common(rel, c);
  rel->add_flag("--span", c.span, "compare span dimensions with class counts below --cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  hall_set_jobs(c.jobs);
  hall_set_budget(c.budget);
  hall_reset_budget();
  Runner r(c);
  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "mult") {
      if (!c.left.empty() || !c.right.empty()) {
        need(c.left, "--left");
        need(c.right, "--right");
        return r.report([&](char** o) { return hall_multiply(r.instance(), c.left.c_str(), c.right.c_str(), o); });
      }
      need(c.cap, "--cap or --left/--right");
      return r.report([&](char** o) { return hall_mult_table(r.instance(), c.cap.c_str(), r.format(), o); });
    }
    if (name == "comult") return r.report([&](char** o) { return hall_comultiply(r.instance(), c.key.c_str(), o); });
    if (name == "hallpoly") {
      std::string quiver = c.quiver_path.empty() ? "" : slurp(c.quiver_path, "quiver");
      return r.report([&](char** o) {
        return hall_polynomial(c.instance.c_str(), quiver.empty() ? nullptr : quiver.c_str(), c.left.c_str(),
                               c.right.c_str(), c.target.c_str(), c.primes.data(), static_cast<int>(c.primes.size()),
                               c.holdout, o);
      });
    }
    if (name == "check2segal") {
      need(c.cap, "--cap");
      return r.report([&](char** o) { return hall_check_2segal(r.instance(), c.cap.c_str(), c.corrupt ? 1 : 0, o); });
    }
    if (name == "checkculf") {
      need(c.cap, "--cap");
      return r.report([&](char** o) { return hall_check_culf(r.instance(), c.sub.c_str(), c.cap.c_str(), o); });
    }
    if (name == "module-act") {
      if (c.reconcile) return r.report([](char** o) { return hall_module_reconciliation(o); });
      if (c.certify) {
        auto d = r.duality();
        return r.report([&](char** o) {
          return hall_module_certify(r.instance(), d.c_str(), need(c.cap, "--cap").c_str(), o);
        });
      }
      if (!c.left.empty() || !c.right.empty()) {
        need(c.left, "--left");
        need(c.right, "--right");
        return r.report([&](char** o) { return hall_module_act(r.module(), c.left.c_str(), c.right.c_str(), o); });
      }
      return r.report([&](char** o) { return hall_module_check(r.module(), o); });
    }
    if (name == "framed") {
      auto st = slurp(c.stability_path, "stability");
      need(c.cap, "--cap");
      return r.report([&](char** o) { return hall_framed(r.instance(), st.c_str(), c.cap.c_str(), o); });
    }
    if (name == "coha-mult") {
      if (c.module) return r.report([&](char** o) { return hall_coha_act(c.m, c.left.c_str(), c.right.c_str(), o); });
      return r.report([&](char** o) { return hall_coha_multiply(c.m, c.left.c_str(), c.right.c_str(), o); });
    }
    if (name == "coha-dt" || name == "coha-wprim") {
      int w = to_int(need(c.cap, "--cap"), "--cap");
      if (name == "coha-dt") return r.report([&](char** o) { return hall_coha_dt(c.m, w, c.degree_cap, r.format(), o); });
      return r.report([&](char** o) { return hall_coha_wprim(c.m, w, c.degree_cap, r.format(), o); });
    }
    if (name == "relations") {
      need(c.cap, "--cap");
      if (c.span) return r.report([&](char** o) { return hall_simples_span(r.instance(), c.cap.c_str(), o); });
      return r.report([&](char** o) { return hall_relations(r.instance(), c.cap.c_str(), o); });
    }
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Runner::Failed& f) {
    return Runner::finish(f.status);
  }
  std::cerr << "error: unknown subcommand " << name << "\n";
  return kExitUsage;
}
