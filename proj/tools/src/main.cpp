#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "manifest.hpp"

#include "hinscreen/version.hpp"

int main(int argc, char** argv) {
  hinscreen::cli::set_invocation(argc, argv);

  CLI::App app{"Exclusion-list prediction over heterogeneous information networks"};
  app.set_version_flag("--version", hinscreen::kVersion);
  app.require_subcommand(1);

  hinscreen::cli::CommonFlags common;
  app.add_option("--threads", common.threads, "Worker thread cap for parallel stages")
      ->check(CLI::PositiveNumber);

  hinscreen::cli::register_data_commands(app, common);
  hinscreen::cli::register_model_commands(app, common);
  hinscreen::cli::register_analysis_commands(app, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
