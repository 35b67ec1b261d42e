// Copyright 2026 The ADON Authors
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


// Talks to the control plane over TCP: reads the config, raises one gain,
// streams a few telemetry records and prints the log.

#include <chrono>
#include <condition_variable>
#include <iostream>
#include <mutex>

#include "adon/control/client.hpp"
#include "adon/control/server.hpp"
#include "adon/control/service.hpp"
#include "adon/scenario/scenario.hpp"

int main() {
  using namespace adon;
  control::ServiceOptions so;
  so.service_policy = scenario::ServicePolicy::kApply;
  control::NetworkService service(scenario::load_scenario("0 establish 2\n"), so);
  control::TcpServer server(service);
  control::Client client("127.0.0.1", server.port());

  std::mutex mu;
  std::condition_variable cv;
  int seen = 0;
  client.subscribe(
      {{"amplifiers", {1}}},
      [&](const nlohmann::json& item) {
        std::cout << "telemetry " << item.dump() << '\n';
        std::lock_guard lock(mu);
        ++seen;
        cv.notify_all();
      },
      [](const auto&) {});

  std::cout << "gain of amp 1: " << client.call("get-config").at("amplifiers")[1].at("gain_db") << '\n';
  client.call("edit-config", {{"amplifiers", {{{"id", 1}, {"gain_db", 19.5}}}}});
  for (int i = 0; i < 3; ++i) service.step();
  {
    std::unique_lock lock(mu);
    cv.wait_for(lock, std::chrono::seconds(5), [&] { return seen == 3; });
  }
  const auto logs = client.call("get-logs", {{"from", 0}, {"to", 10}});
  for (const auto& e : logs.at("entries"))
    std::cout << "log " << e.at("tick") << ' ' << e.at("source").get<std::string>() << ": "
              << e.at("text").get<std::string>() << '\n';
}
