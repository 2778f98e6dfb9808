// Copyright 2026 The gtpar Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <vector>

#include "common.hpp"
#include "gtpar/errors.hpp"

int main(int argc, char** argv) {
  using namespace gtpar;
  using namespace gtpar::cli;

  CLI::App app{"gtpar: graph transformer parallelism toolkit"};
  app.require_subcommand(1);
  const std::vector<Command> commands = {add_generate(app), add_verify(app), add_bench(app),
                                         add_profile(app),  add_plan(app),   add_train(app)};
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
    return kUsageError;
  }

  for (const Command& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      return c.run();
    } catch (const IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoFailure;
    } catch (const DataError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoFailure;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsageError;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return kVerificationFailure;
    }
  }
  return kUsageError;
}
