// Copyright 2026 The fogbridge Authors
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

// fog-registry: standalone registry server.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>

#include "fog/common/error.hpp"
#include "fog/common/log.hpp"
#include "fog/common/signals.hpp"
#include "fog/registry/registry.hpp"

int main(int argc, char ** argv)
{
  CLI::App app{"fog registry server"};
  fog::registry::ServerOptions opts;
  int liveness_ms = 6000;
  app.add_option("--host", opts.host, "bind address");
  app.add_option("--port", opts.port, "bind port (0 = ephemeral)");
  app.add_option("--liveness-ms", liveness_ms, "drop silent connections after this long");
  CLI11_PARSE(app, argc, argv);
  opts.liveness_timeout = std::chrono::milliseconds(liveness_ms);

  fog::block_termination_signals();
  fog::init_logging("registry");
  try {
    fog::registry::RegistryServer server(opts);
    server.start();
    std::printf("listening %s\n", server.address().str().c_str());
    std::fflush(stdout);
    fog::wait_termination_signal();
    server.stop();
  } catch (const fog::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
