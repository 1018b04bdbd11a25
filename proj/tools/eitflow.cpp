// Command-line front end: eitflow <task> --config <file> --out <dir> [--threads N] [--seed S]

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eitflow/io/config.hpp"
#include "eitflow/io/output.hpp"
#include "eitflow/io/tasks.hpp"

namespace {

namespace io = eitflow::io;

int report(const std::string& task, const std::string& out_dir, eitflow::ErrorKind kind,
           const std::string& message, int code, const io::ParseError* parse = nullptr) {
  const io::Json doc = io::error_document(task, kind, message, code, parse);
  std::cerr << doc.dump() << "\n";
  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
      io::atomic_write(std::filesystem::path(out_dir) / "error.json", doc.dump(2) + "\n");
    } catch (const std::exception&) {
      // stderr already carries the document
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counter-propagating probe simulator for a moving EIT gas"};
  std::string task, config_path, out_dir;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  app.add_option("task", task, "Task to run")
      ->required()
      ->check(CLI::IsMember(io::task_names()));
  app.add_option("--config", config_path, "Configuration file")->required();
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--seed", seed, "Seed of the synthetic-noise generator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report(task, "", eitflow::ErrorKind::validation, e.what(), 2);
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    io::RunOptions opts;
    opts.threads = threads;
    opts.seed = seed;
    opts.config_path = config_path;
    opts.config_text = io::read_file(config_path);
    const io::RunConfig cfg = io::parse_config(opts.config_text);
    const io::TaskOutput out = io::run_task(cfg, task, opts);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_outputs(out_dir, out, io::run_manifest(cfg, out, opts, wall));
    std::cout << task << ": wrote " << out.files.size() + 1 << " files to " << out_dir << "\n";
    return 0;
  } catch (const io::ParseError& e) {
    return report(task, out_dir, e.kind(), e.what(), e.exit_code(), &e);
  } catch (const eitflow::Error& e) {
    return report(task, out_dir, e.kind(), e.what(), e.exit_code());
  } catch (const std::exception& e) {
    return report(task, out_dir, eitflow::ErrorKind::convergence_failure,
                  std::string("internal error: ") + e.what(), 3);
  }
}
