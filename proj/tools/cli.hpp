#pragma once

// Command-line front end: compress, decompress, verify and sweep raw volumes.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 I/O or corrupt archive.

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lopc/lopc.hpp"

namespace lopc::cli {

enum exit_code : int { ok = 0, verify_failed = 1, usage = 2, io_failure = 3 };

inline int exit_code_for(errc code) noexcept
{
  switch (code) {
    case errc::bound_violation: return verify_failed;
    case errc::spec_mismatch:
    case errc::io_error:
    case errc::bad_magic:
    case errc::version_unsupported:
    case errc::corrupt_stream:
    case errc::length_mismatch: return io_failure;
    default: return usage;
  }
}

inline int default_threads()
{
  if (const char* env = std::getenv("LOPC_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 0;
}

inline std::vector<double> default_sweep_bounds() { return {1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

struct SweepRow {
  double eb = 0.0;
  double ratio = 0.0;
  double bin_fraction = 0.0;
  double subbin_fraction = 0.0;
  std::size_t raises = 0;
  double seconds = 0.0;
};

template <field_value T>
SweepRow sweep_point(const ScalarField<T>& field, const ErrorBound& eb, int threads)
{
  const auto start = std::chrono::steady_clock::now();
  CompressStats stats;
  const CompressedArchive a = compress(field, eb, threads, &stats);
  const auto bytes = a.serialize();
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  SweepRow row;
  row.eb = eb.value;
  row.ratio = static_cast<double>(field.size() * sizeof(T)) / static_cast<double>(bytes.size());
  std::tie(row.bin_fraction, row.subbin_fraction) = stream_split_stats(a);
  row.raises = stats.fixpoint_raises;
  row.seconds = dt.count();
  return row;
}

namespace detail {

struct VolumeArgs {
  std::string type = "f32";
  std::vector<std::size_t> dims;

  RawVolumeSpec spec(const std::string& path) const
  {
    RawVolumeSpec s;
    s.path = path;
    s.dtype = type == "f64" ? DataType::f64 : DataType::f32;
    s.shape = GridShape(static_cast<int>(dims.size()), dims);
    return s;
  }
};

inline void add_volume_options(CLI::App& cmd, VolumeArgs& v)
{
  cmd.add_option("--type", v.type, "element type")->check(CLI::IsMember({"f32", "f64"}))->required();
  cmd.add_option("--dims", v.dims, "grid extents X,Y[,Z] (x fastest)")
      ->delimiter(',')
      ->expected(2, 3)
      ->required();
}

inline ErrorBound make_bound(const std::string& mode, double value)
{
  return mode == "abs" ? ErrorBound::absolute(value) : ErrorBound::normalized(value);
}

inline std::string format_csv_number(double v)
{
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace detail

/// Runs one CLI invocation; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Local-order-preserving error-bounded compressor"};
  app.name("lopc");
  app.require_subcommand(1);

  int threads = default_threads();
  app.add_option("--threads", threads, "worker threads (0 = all; env LOPC_THREADS)")
      ->check(CLI::NonNegativeNumber);

  // compress
  auto* compress_cmd = app.add_subcommand("compress", "compress a raw volume into an archive");
  detail::VolumeArgs c_vol;
  std::string c_input, c_out, c_mode = "noa", c_degrade;
  double c_eb = 0.0;
  compress_cmd->add_option("input", c_input, "raw little-endian volume")->required();
  detail::add_volume_options(*compress_cmd, c_vol);
  compress_cmd->add_option("--eb-mode", c_mode, "error-bound mode")
      ->check(CLI::IsMember({"abs", "noa"}));
  compress_cmd->add_option("--eb", c_eb, "error bound")->check(CLI::PositiveNumber)->required();
  compress_cmd->add_option("--out", c_out, "archive path")->required();
  compress_cmd->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
  compress_cmd->add_option("--degrade", c_degrade)
      ->check(CLI::IsMember({"mid-bin"}))
      ->group("");  // hidden: writes a subbin-free raw reconstruction instead

  // decompress
  auto* decompress_cmd = app.add_subcommand("decompress", "restore a raw volume from an archive");
  std::string d_input, d_out;
  decompress_cmd->add_option("archive", d_input)->required();
  decompress_cmd->add_option("--out", d_out, "raw output path")->required();
  decompress_cmd->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "check a reconstruction against the original");
  detail::VolumeArgs v_vol;
  std::string v_orig, v_recon, v_mode = "noa", v_format = "json";
  double v_eb = 0.0;
  verify_cmd->add_option("original", v_orig)->required();
  verify_cmd->add_option("reconstructed", v_recon)->required();
  detail::add_volume_options(*verify_cmd, v_vol);
  verify_cmd->add_option("--eb-mode", v_mode)->check(CLI::IsMember({"abs", "noa"}));
  verify_cmd->add_option("--eb", v_eb, "error bound to check")->check(CLI::PositiveNumber)->required();
  verify_cmd->add_option("--format", v_format)->check(CLI::IsMember({"json", "csv"}));
  verify_cmd->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "compress at several bounds and emit CSV");
  detail::VolumeArgs s_vol;
  std::string s_input, s_out, s_mode = "noa";
  std::vector<double> s_ebs = default_sweep_bounds();
  sweep_cmd->add_option("input", s_input)->required();
  detail::add_volume_options(*sweep_cmd, s_vol);
  sweep_cmd->add_option("--eb-mode", s_mode)->check(CLI::IsMember({"abs", "noa"}));
  sweep_cmd->add_option("--eb", s_ebs, "bounds to sweep")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", s_out, "CSV path (stdout if omitted)");
  sweep_cmd->add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return usage;
  }

  try {
    if (*compress_cmd) {
      const AnyField field = read_raw(c_vol.spec(c_input));
      const ErrorBound eb = detail::make_bound(c_mode, c_eb);
      if (!c_degrade.empty()) {
        const AnyField recon = std::visit(
            [&](const auto& f) -> AnyField {
              using T = typename std::decay_t<decltype(f)>::value_type;
              const ResolvedBound rb = resolve(eb, std::span<const T>(f.values));
              auto r = f;
              for (auto& v : r.values) v = decode_mid_bin<T>(quantize(v, rb.eps_abs), rb.eps_abs);
              return r;
            },
            field);
        write_raw(c_out, recon);
        return ok;
      }
      const auto start = std::chrono::steady_clock::now();
      CompressStats stats;
      const CompressedArchive archive = std::visit(
          [&](const auto& f) { return compress(f, eb, threads, &stats); }, field);
      const auto bytes = archive.serialize();
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      write_file(c_out, bytes);
      const auto [bin_frac, sub_frac] = stream_split_stats(archive);
      const std::size_t raw_size = archive.header.shape.size() *
                                   static_cast<std::size_t>(element_size(archive.header.dtype));
      nlohmann::json stats_json = {
          {"input_bytes", raw_size},
          {"archive_bytes", bytes.size()},
          {"compression_ratio",
           static_cast<double>(raw_size) / static_cast<double>(bytes.size())},
          {"bin_bytes", archive.bin_stream.size()},
          {"subbin_bytes", archive.subbin_stream.size()},
          {"bin_fraction", bin_frac},
          {"subbin_fraction", sub_frac},
          {"eps_abs", archive.header.eps_abs},
          {"fixpoint_iterations", stats.fixpoint_iterations},
          {"fixpoint_raises", stats.fixpoint_raises},
          {"seconds", dt.count()},
      };
      out << stats_json.dump() << "\n";
      return ok;
    }

    if (*decompress_cmd) {
      const auto bytes = read_file(d_input);
      write_raw(d_out, decompress(bytes, threads));
      return ok;
    }

    if (*verify_cmd) {
      const AnyField a = read_raw(v_vol.spec(v_orig));
      const AnyField b = read_raw(v_vol.spec(v_recon));
      const ErrorBound eb = detail::make_bound(v_mode, v_eb);
      const VerificationReport report = std::visit(
          [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            const auto& g = std::get<F>(b);
            using T = typename F::value_type;
            const ResolvedBound rb = resolve(eb, std::span<const T>(f.values));
            return verify_reconstruction(f, g, rb.eps_abs, threads);
          },
          a);
      if (v_format == "csv") {
        out << csv_header() << "\n" << to_csv_row(report) << "\n";
      } else {
        out << to_json(report).dump() << "\n";
      }
      return report.passed() ? ok : verify_failed;
    }

    if (*sweep_cmd) {
      const AnyField field = read_raw(s_vol.spec(s_input));
      std::ostringstream csv;
      csv << "eb,ratio,bin_pct,subbin_pct,raises,time\n";
      for (double e : s_ebs) {
        const SweepRow row = std::visit(
            [&](const auto& f) { return sweep_point(f, detail::make_bound(s_mode, e), threads); },
            field);
        csv << detail::format_csv_number(row.eb) << ',' << detail::format_csv_number(row.ratio)
            << ',' << detail::format_csv_number(100.0 * row.bin_fraction) << ','
            << detail::format_csv_number(100.0 * row.subbin_fraction) << ',' << row.raises << ','
            << detail::format_csv_number(row.seconds) << "\n";
      }
      if (s_out.empty()) {
        out << csv.str();
      } else {
        const std::string s = csv.str();
        write_file(s_out, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      }
      return ok;
    }
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return usage;
}

}  // namespace lopc::cli
