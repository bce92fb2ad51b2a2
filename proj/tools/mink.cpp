// mink: question-mark values, certified moments, and table reproduction.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"

namespace {

struct Common {
  std::optional<unsigned> threads;
  std::optional<double> target_width;
  std::optional<std::string> cache;
  bool timing = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_width = true) {
  cmd->add_option("--threads", c.threads, "Worker threads (env MINK_THREADS; default: all cores)")
      ->check(CLI::Range(1u, 4096u));
  if (with_width)
    cmd->add_option("--target-width", c.target_width, "Absolute enclosure width (env MINK_TARGET_WIDTH; default 1e-9)")
        ->check(CLI::PositiveNumber);
  cmd->add_option("--cache", c.cache, "Result cache file (env MINK_CACHE; default: no cache)");
  cmd->add_flag("--timing", c.timing, "Include wall_time in JSON output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minkowski question mark function: exact values and certified moments"};
  app.require_subcommand(1);

  Common common;

  std::string qx;
  bool qF = false;
  auto* qmark = app.add_subcommand("qmark", "Exact ?(x) (or F(x) with --F) at a rational p/q");
  qmark->add_option("x", qx, "Rational p/q")->required();
  qmark->add_flag("--F", qF, "Print F(x) = ?(x)/2 extended to x >= 0");

  mink::MomentArgs margs;
  auto* moment = app.add_subcommand("moment", "Certified enclosure of m_L (or M_L) as JSON");
  moment->add_option("L", margs.L, "Moment order")->required()->check(CLI::NonNegativeNumber);
  moment->add_option("--relative-width", margs.relative_width, "Relative width instead of absolute")
      ->check(CLI::PositiveNumber);
  moment->add_option("--method", margs.method, "stieltjes or tree")->check(CLI::IsMember({"stieltjes", "tree"}));
  moment->add_option("--mode", margs.mode, "adaptive or uniform")->check(CLI::IsMember({"adaptive", "uniform"}));
  moment->add_option("--depth", margs.max_depth, "Maximum (or, in uniform mode, exact) tree depth")
      ->check(CLI::Range(1, 40));
  moment->add_option("--kind", margs.kind, "m or M")->check(CLI::IsMember({"m", "M"}));
  moment->add_option("--cutoff", margs.cutoff, "Quadrature cutoff N for M_L")->check(CLI::PositiveNumber);
  moment->add_option("--generation", margs.generation, "Generation for --method tree")->check(CLI::Range(1, 30));
  add_common(moment, common);

  mink::TableOptions topts;
  std::string rows = "1-12,20,30,40,50,100", format = "csv";
  std::optional<double> relative_width;
  auto* table = app.add_subcommand("table", "Reproduce the table of m_L and m*_L");
  table->add_option("--rows", rows, "Rows, e.g. 1-12,20,30,40,50,100");
  table->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  table->add_option("--relative-width", relative_width, "Relative width for rows L > 12 (default 1e-5)")
      ->check(CLI::PositiveNumber);
  table->add_option("--c0-width", topts.c0_width, "Width of c0 used by the predictor column")
      ->check(CLI::PositiveNumber);
  add_common(table, common);

  auto* constants = app.add_subcommand("constants", "c0, c1, C and the leading coefficient as JSON");
  add_common(constants, common);

  mink::VerifyArgs vargs;
  auto* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("--suite", vargs.suite, "distr, identities, laplace or all")
      ->check(CLI::IsMember({"distr", "identities", "laplace", "all"}));
  verify->add_option("--samples", vargs.samples, "Random samples for the distr suite")->check(CLI::PositiveNumber);
  verify->add_option("--seed", vargs.seed, "Random seed");
  add_common(verify, common, false);

  mink::PlotArgs pargs;
  auto* plot = app.add_subcommand("plot-data", "CSV sample points for plotting");
  plot->add_option("--what", pargs.what, "qmark, psi or mstar")->check(CLI::IsMember({"qmark", "psi", "mstar"}));
  plot->add_option("--samples", pargs.samples, "Number of samples (>= 2)")->check(CLI::Range(2, 1 << 20));
  add_common(plot, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mink::kUsageError;
  }

  try {
    const auto settings = mink::resolve_settings(common.threads, common.target_width, common.cache, common.timing);
    if (*qmark) return mink::cmd_qmark(qx, qF, std::cout);
    if (*moment) return mink::cmd_moment(margs, settings, std::cout);
    if (*table) {
      topts.rows = mink::parse_rows(rows);
      topts.absolute_width = settings.target_width;
      if (relative_width) topts.relative_width = *relative_width;
      return mink::cmd_table(topts, format, settings, std::cout);
    }
    if (*constants) return mink::cmd_constants(settings, std::cout);
    if (*verify) return mink::cmd_verify(vargs, settings, std::cout);
    if (*plot) return mink::cmd_plot_data(pargs, settings, std::cout);
  } catch (const mink::usage_error& e) {
    std::cerr << "mink: " << e.what() << '\n';
    return mink::kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "mink: " << e.what() << '\n';
    return 4;
  }
  return mink::kUsageError;
}
