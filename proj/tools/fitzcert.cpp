#include "fitzcert/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fitzcert;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitSchema = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw ScenarioError(path, "cannot open scenario file"); }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) { continue; }
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
      throw ScenarioError(flag, "'" + item + "' is not a number");
    }
    out.push_back(x);
  }
  return out;
}

// --out wins; otherwise FITZCERT_OUT_DIR/<stem>.<ext>; otherwise stdout.
std::optional<fs::path> sink(const std::string& out, const std::string& scenario, const std::string& ext) {
  if (!out.empty()) {
    fs::path p(out);
    if (ext != "jsonl") { p.replace_extension(ext); }
    return p;
  }
  if (const char* dir = std::getenv("FITZCERT_OUT_DIR"); dir != nullptr && *dir != '\0') {
    return fs::path(dir) / (fs::path(scenario).stem().string() + "." + ext);
  }
  return std::nullopt;
}

template <typename W> void emit(const std::optional<fs::path>& path, W&& write) {
  if (!path) {
    write(std::cout);
    return;
  }
  if (path->has_parent_path()) { fs::create_directories(path->parent_path()); }
  std::ofstream out(*path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot write " + path->string()); }
  write(out);
}

void emit_report(const Report& rep, const std::string& scenario, const std::string& out, const std::string& format) {
  if (format == "jsonl" || format == "both") {
    emit(sink(out, scenario, "jsonl"), [&](std::ostream& os) { write_jsonl(os, rep); });
  }
  if (format == "csv" || format == "both") {
    emit(sink(out, scenario, "csv"), [&](std::ostream& os) { write_csv(os, rep); });
  }
}

void print_failures(const Report& rep) {
  std::size_t fails = 0;
  const CertificateRecord* worst = nullptr;
  for (const auto& r : rep.records) {
    if (r.pass) { continue; }
    ++fails;
    if (worst == nullptr || r.slack < worst->slack || r.error) { worst = &r; }
  }
  if (worst == nullptr) { return; }
  std::cerr << "fitzcert: " << fails << " of " << rep.records.size() << " records failed; worst: "
            << record_json(*worst) << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify Fitzpatrick-gap inequalities for monotone operators on l^p spaces"};
  app.require_subcommand(1);

  std::string file;
  std::string out;
  std::string format = "jsonl";
  unsigned jobs = 1;
  std::optional<double> tol;
  std::string lambda_list;
  std::string p_list;

  auto* verify = app.add_subcommand("verify", "Run every certificate in a scenario");
  verify->add_option("file", file, "Scenario JSON file")->required();
  verify->add_option("--out", out, "Report path (csv output uses the same stem)");
  verify->add_option("--format", format, "Report format")->check(CLI::IsMember({"jsonl", "csv", "both"}));
  verify->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a lambda (and p) grid");
  sweep->add_option("file", file, "Scenario JSON file")->required();
  sweep->add_option("--lambda", lambda_list, "Comma-separated lambda values (empty for no cells)")->required();
  sweep->add_option("--p", p_list, "Comma-separated p values");
  sweep->add_option("--out", out, "Report path");
  sweep->add_option("--format", format, "Report format")->check(CLI::IsMember({"jsonl", "csv", "both"}));
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));

  auto* oracle = app.add_subcommand("oracle", "Cross-validate closed forms against brute force");
  oracle->add_option("file", file, "Scenario JSON file")->required();
  oracle->add_option("--out", out, "Report path");

  for (auto* sub : {verify, sweep}) {
    sub->add_option_function<double>(
           "--tol", [&](double t) { tol = t; }, "Certificate tolerance (absolute and relative)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitSchema;
  }

  try {
    const RunOptions run{jobs, tol};
    if (*verify) {
      const Report rep = run_verify(load_scenario(file), run);
      emit_report(rep, file, out, format);
      print_failures(rep);
      return rep.all_pass() ? 0 : kExitFail;
    }
    if (*sweep) {
      const Report rep =
          run_sweep(read_file(file), parse_list(lambda_list, "--lambda"), parse_list(p_list, "--p"), run);
      emit_report(rep, file, out, format);
      print_failures(rep);
      return rep.all_pass() ? 0 : kExitFail;
    }
    const OracleReport rep = run_oracle(load_scenario(file));
    emit(sink(out, file, "jsonl"), [&](std::ostream& os) { write_oracle_jsonl(os, rep); });
    for (const auto& c : rep.checks) {
      if (!c.pass) {
        std::cerr << "fitzcert: oracle check " << c.name << " disagrees by " << c.max_error << ": " << c.detail << '\n';
      }
    }
    return rep.all_pass() ? 0 : kExitFail;
  } catch (const ScenarioError& e) {
    std::cerr << "fitzcert: schema error at " << e.what() << '\n';
    return kExitSchema;
  } catch (const ValidationError& e) {
    std::cerr << "fitzcert: invalid scenario: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "fitzcert: " << e.what() << '\n';
    return kExitFail;
  }
}
