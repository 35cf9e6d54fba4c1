// fibre-forge: bundle, algebra and validate jobs driven by JSON configs.
//
// Exit codes: 0 all checks pass, 1 failed checks or validation diagnostics,
// 2 config/schema error, 3 numeric domain error, 4 resource cap exceeded.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fibre/algebra.hpp"
#include "fibre/geometry.hpp"
#include "fibre/jobs.hpp"
#include "fibre/parallel.hpp"

namespace {

enum Exit { kPass = 0, kFailed = 1, kConfig = 2, kDomain = 3, kCap = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fibre::ConfigError("", "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct Options {
  std::string config;
  std::string out;
  std::string csv;
  unsigned threads = 0;
  bool timings = false;
};

int run_job(const Options& o, bool bundle) {
  fibre::parallel::set_threads(o.threads);
  const auto config = fibre::parse_config(read_file(o.config));
  fibre::JobResult r = bundle ? fibre::run_bundle_report(config, o.timings) : fibre::run_algebra_report(config, o.timings);
  const std::string text = r.report.dump(2) + "\n";
  if (o.out.empty()) std::cout << text;
  else write_file(o.out, text);
  std::string csv = o.csv;
  if (csv.empty() && !o.out.empty()) csv = std::filesystem::path(o.out).replace_extension(".csv").string();
  if (!csv.empty()) write_file(csv, r.csv);
  if (!r.pass) {
    for (const auto& c : r.report.value("checks", nlohmann::json::array()))
      if (!c["pass"].get<bool>())
        std::cerr << "check failed: " << c["name"].get<std::string>() << " = " << c["value"].dump()
                  << " (threshold " << c["threshold"].dump() << ")\n";
    if (!bundle) std::cerr << "check failed: see \"pass\" fields in the report\n";
  }
  return r.pass ? kPass : kFailed;
}

int run_validate(const std::string& path) {
  const auto config = fibre::parse_config(read_file(path));
  const auto issues = fibre::validate_config(config);
  for (const auto& d : issues) std::cerr << path << ": " << d << "\n";
  if (issues.empty()) std::cout << "ok\n";
  return issues.empty() ? kPass : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vector bundles from transition functions, Chern characters and exact cyclic homology"};
  app.require_subcommand(1);
  Options o;

  auto add_job = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", o.config, "JSON config")->required();
    cmd->add_option("--out", o.out, "report path (stdout when absent)");
    cmd->add_option("--csv", o.csv, "table path (defaults to the report path with .csv)");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--timings", o.timings, "add wall-clock timings to the report");
    return cmd;
  };
  auto* bundle = add_job("bundle", "cocycle, connection, curvature and Chern checks for a bundle");
  auto* algebra = add_job("algebra", "exact forms, homology and Chern classes for a finite-dimensional algebra");
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", o.config, "JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    if (bundle->parsed()) return run_job(o, true);
    if (algebra->parsed()) return run_job(o, false);
    return run_validate(o.config);
  } catch (const fibre::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fibre::AlgebraError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fibre::UnknownManifold& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fibre::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const fibre::PartitionError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kDomain;
  } catch (const fibre::SizeCapExceeded& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kCap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
