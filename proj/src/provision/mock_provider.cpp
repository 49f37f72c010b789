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

#include "fog/provision/mock_provider.hpp"

#include <fstream>
#include <sstream>

#include "fog/common/error.hpp"
#include "fog/common/ids.hpp"
#include "fog/common/kvfile.hpp"

namespace fog::provision
{

namespace fs = std::filesystem;

MockRemoteProvider::MockRemoteProvider(MockScript script, std::optional<fs::path> state_file)
: script_(std::move(script)), state_file_(std::move(state_file))
{
  load();
}

void MockRemoteProvider::load()
{
  if (!state_file_) {
    return;
  }
  std::ifstream in(*state_file_);
  if (!in) {
    return;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  for (const auto & s : parse_sections(ss.str())) {
    if (s.kind != "instance") {
      continue;
    }
    auto get = [&](const char * key) {
        auto * e = s.find(key);
        return e ? e->value : std::string();
      };
    Instance i;
    i.handle = {get("deployment"), get("name"), get("id")};
    auto base = net::parse_address(get("base"));
    if (!base) {
      continue;
    }
    i.base = *base;
    i.instance_type = get("instance_type");
    instances_[{i.handle.deployment_id, i.handle.name}] = i;
    next_host_ = std::max(next_host_, static_cast<int>(instances_.size()) + 1);
  }
}

void MockRemoteProvider::save() const
{
  if (!state_file_) {
    return;
  }
  std::string out;
  for (const auto & [key, i] : instances_) {
    KvSection s{"instance", i.handle.id, 0, {}};
    s.entries = {{"deployment", i.handle.deployment_id, 0}, {"name", i.handle.name, 0},
      {"id", i.handle.id, 0}, {"base", i.base.str(), 0}, {"instance_type", i.instance_type, 0}};
    out += render_section(s) + "\n";
  }
  fs::create_directories(state_file_->parent_path());
  auto tmp = *state_file_;
  tmp += ".tmp";
  std::ofstream(tmp, std::ios::trunc) << out;
  fs::rename(tmp, *state_file_);
}

const MockRemoteProvider::Instance & MockRemoteProvider::require(const InstanceHandle & h) const
{
  auto it = instances_.find({h.deployment_id, h.name});
  if (it == instances_.end() || (!h.id.empty() && it->second.handle.id != h.id)) {
    throw Error(ErrorCode::kProvider, "no such instance " + h.deployment_id + "/" + h.name);
  }
  return it->second;
}

InstanceHandle MockRemoteProvider::create_instance(const std::string & deployment_id,
  const std::string & name, const manifest::MachineSpec & machine, const SecurityRules &)
{
  std::lock_guard<std::mutex> lock(mu_);
  calls_.push_back({{deployment_id, name, ""}, "create_instance", {machine.instance_type}, ""});
  if (script_.refuse_instances.count(name)) {
    throw Error(ErrorCode::kProvider, "capacity unavailable for " + name);
  }
  if (instances_.count({deployment_id, name})) {
    throw Error(ErrorCode::kProvider, "instance " + name + " already exists");
  }
  Instance i;
  i.handle = {deployment_id, name, "i-" + random_hex(8)};
  int n = next_host_++;
  i.base = {"10.0." + std::to_string(n / 250) + "." + std::to_string(n % 250 + 1), 20000};
  i.instance_type = machine.instance_type;
  instances_[{deployment_id, name}] = i;
  save();
  return i.handle;
}

net::Address MockRemoteProvider::address(const InstanceHandle & h)
{
  std::lock_guard<std::mutex> lock(mu_);
  return require(h).base;
}

void MockRemoteProvider::push_files(const InstanceHandle & h, const std::vector<fs::path> & local,
  const std::string & remote_root)
{
  std::lock_guard<std::mutex> lock(mu_);
  require(h);
  MockCall c{h, "push_files", {}, remote_root};
  for (const auto & p : local) {
    if (!fs::exists(p)) {
      throw Error(ErrorCode::kProvider, "push: no such file " + p.string());
    }
    c.args.push_back(p.string());
  }
  calls_.push_back(std::move(c));
}

ExecResult MockRemoteProvider::exec(const InstanceHandle & h, const ExecRequest & request)
{
  std::lock_guard<std::mutex> lock(mu_);
  require(h);
  calls_.push_back({h, "exec", request.argv, request.label});
  if (auto it = script_.by_label.find(request.label); it != script_.by_label.end()) {
    return it->second;
  }
  if (!request.argv.empty()) {
    auto prog = fs::path(request.argv[0]).filename().string();
    if (auto it = script_.by_program.find(prog); it != script_.by_program.end()) {
      return it->second;
    }
  }
  ExecResult r;
  if (request.detach) {
    r.pid = next_pid_++;
  }
  return r;
}

void MockRemoteProvider::terminate(const InstanceHandle & h)
{
  std::lock_guard<std::mutex> lock(mu_);
  calls_.push_back({h, "terminate", {}, ""});
  auto it = instances_.find({h.deployment_id, h.name});
  if (it != instances_.end() && (h.id.empty() || it->second.handle.id == h.id)) {
    instances_.erase(it);
    save();
  }
}

std::vector<InstanceHandle> MockRemoteProvider::list_instances(const std::string & deployment_id)
{
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<InstanceHandle> out;
  for (const auto & [key, i] : instances_) {
    if (key.first == deployment_id) {
      out.push_back(i.handle);
    }
  }
  return out;
}

std::vector<MockCall> MockRemoteProvider::calls() const
{
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

}  // namespace fog::provision
