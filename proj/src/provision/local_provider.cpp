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

#include "fog/provision/local_provider.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <spdlog/spdlog.h>
#include <sys/file.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "fog/common/error.hpp"
#include "fog/common/ids.hpp"
#include "fog/common/kvfile.hpp"

extern char ** environ;

namespace fog::provision
{

namespace fs = std::filesystem;
using namespace std::chrono_literals;

struct LocalProvider::Info
{
  std::string id;
  std::string deployment;
  std::string name;
  int pgid{0};
  std::string host;
  std::uint16_t base_port{0};
  std::string instance_type;
  int workers{1};
  bool gpu{false};
  double core_share{1.0};
  int node_first{0};
  int node_last{0};
  std::vector<std::string> peers;
};

namespace
{

constexpr const char * kInfoFile = "instance.info";
constexpr const char * kReadyFile = "instance.ready";

std::string render_info(const auto & info)
{
  KvSection s{"instance", info.name, 0, {}};
  auto add = [&](const std::string & k, const std::string & v) {s.entries.push_back({k, v, 0});};
  add("id", info.id);
  add("deployment", info.deployment);
  add("pgid", std::to_string(info.pgid));
  add("host", info.host);
  add("base_port", std::to_string(info.base_port));
  add("instance_type", info.instance_type);
  add("workers", std::to_string(info.workers));
  add("gpu", info.gpu ? "true" : "false");
  std::ostringstream share;
  share << info.core_share;
  add("core_share", share.str());
  add("node_ports", std::to_string(info.node_first) + "-" + std::to_string(info.node_last));
  add("peers", join_list(info.peers));
  return render_section(s);
}

void write_atomic(const fs::path & path, const std::string & text)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path & path)
{
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Non-zombie processes whose process group is `pgid`.
bool group_alive(int pgid)
{
  if (pgid <= 0) {
    return false;
  }
  if (::kill(-pgid, 0) != 0 && errno == ESRCH) {
    return false;
  }
  DIR * d = ::opendir("/proc");
  if (!d) {
    return true;
  }
  bool alive = false;
  while (auto * e = ::readdir(d)) {
    if (e->d_name[0] < '0' || e->d_name[0] > '9') {
      continue;
    }
    std::string stat = read_file(std::string("/proc/") + e->d_name + "/stat");
    auto rp = stat.rfind(')');
    if (rp == std::string::npos) {
      continue;
    }
    std::istringstream rest(stat.substr(rp + 2));
    char state = 0;
    int ppid = 0, pgrp = 0;
    rest >> state >> ppid >> pgrp;
    if (pgrp == pgid && state != 'Z' && state != 'X') {
      alive = true;
      break;
    }
  }
  ::closedir(d);
  return alive;
}

class FileLock
{
public:
  explicit FileLock(const fs::path & path)
  {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_EX);
    }
  }
  ~FileLock()
  {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock &) = delete;
  FileLock & operator=(const FileLock &) = delete;

private:
  int fd_{-1};
};

std::vector<std::string> build_env(const std::map<std::string, std::string> & overrides)
{
  std::map<std::string, std::string> vars;
  for (char ** e = environ; e && *e; ++e) {
    std::string kv(*e);
    auto eq = kv.find('=');
    if (eq != std::string::npos) {
      vars[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  for (const auto & [k, v] : overrides) {
    vars[k] = v;
  }
  std::vector<std::string> out;
  for (const auto & [k, v] : vars) {
    out.push_back(k + "=" + v);
  }
  return out;
}

std::vector<char *> c_strings(std::vector<std::string> & items)
{
  std::vector<char *> out;
  for (auto & s : items) {
    out.push_back(s.data());
  }
  out.push_back(nullptr);
  return out;
}

struct SpawnSpec
{
  std::vector<std::string> argv;
  std::map<std::string, std::string> env;
  fs::path cwd;
  /// 0: lead a new process group. Otherwise join this process group.
  int pgid{0};
  int out_fd{-1};
};

/// Spawns and returns the pid, or -errno.
int spawn(const SpawnSpec & spec)
{
  posix_spawn_file_actions_t fa;
  posix_spawnattr_t attr;
  posix_spawn_file_actions_init(&fa);
  posix_spawnattr_init(&attr);
  sigset_t none;
  sigemptyset(&none);
  sigset_t all;
  sigfillset(&all);
  short flags = POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF;
  posix_spawnattr_setsigmask(&attr, &none);
  posix_spawnattr_setsigdefault(&attr, &all);
  // pgid 0 starts a new group led by the child. Same session, so later
  // processes may join it.
  flags |= POSIX_SPAWN_SETPGROUP;
  posix_spawnattr_setpgroup(&attr, spec.pgid);
  posix_spawnattr_setflags(&attr, flags);
  posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
  if (spec.out_fd >= 0) {
    posix_spawn_file_actions_adddup2(&fa, spec.out_fd, 1);
    posix_spawn_file_actions_adddup2(&fa, spec.out_fd, 2);
  }
  posix_spawn_file_actions_addchdir_np(&fa, spec.cwd.c_str());

  auto argv = spec.argv;
  auto envs = build_env(spec.env);
  auto c_argv = c_strings(argv);
  auto c_env = c_strings(envs);
  pid_t pid = 0;
  int rc = posix_spawnp(&pid, c_argv[0], &fa, &attr, c_argv.data(), c_env.data());
  posix_spawn_file_actions_destroy(&fa);
  posix_spawnattr_destroy(&attr);
  return rc == 0 ? pid : -rc;
}

std::string tail(const std::string & s, std::size_t n)
{
  return s.size() <= n ? s : s.substr(s.size() - n);
}

bool valid_component(const std::string & s)
{
  return !s.empty() && s != "." && s != ".." && s.find('/') == std::string::npos;
}

}  // namespace

LocalProviderOptions LocalProviderOptions::from_env()
{
  LocalProviderOptions o;
  if (const char * d = std::getenv("FOG_SANDBOX_DIR")) {
    o.sandbox_root = d;
  } else {
    o.sandbox_root = fs::temp_directory_path();
  }
  return o;
}

LocalProvider::LocalProvider(LocalProviderOptions options)
: options_(std::move(options))
{
  if (options_.sandbox_root.empty()) {
    options_.sandbox_root = fs::temp_directory_path();
  }
  fs::create_directories(options_.sandbox_root);
}

LocalProvider::~LocalProvider()
{
  reap();
}

fs::path LocalProvider::deployment_root(const std::string & deployment_id) const
{
  return options_.sandbox_root / ("fog-" + deployment_id);
}

fs::path LocalProvider::instance_root(const InstanceHandle & h) const
{
  return deployment_root(h.deployment_id) / h.name;
}

std::optional<LocalProvider::Info> LocalProvider::read_info(const InstanceHandle & h) const
{
  auto path = instance_root(h) / kInfoFile;
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    return std::nullopt;
  }
  try {
    auto sections = parse_sections(read_file(path));
    if (sections.size() != 1) {
      return std::nullopt;
    }
    const auto & s = sections.front();
    auto get = [&](const char * key) {
        auto * e = s.find(key);
        return e ? e->value : std::string();
      };
    Info i;
    i.name = s.name;
    i.id = get("id");
    i.deployment = get("deployment");
    i.pgid = static_cast<int>(parse_int(get("pgid"), 0));
    i.host = get("host");
    i.base_port = static_cast<std::uint16_t>(parse_int(get("base_port"), 0));
    i.instance_type = get("instance_type");
    i.workers = static_cast<int>(parse_int(get("workers"), 0));
    i.gpu = parse_bool(get("gpu"), 0);
    i.core_share = parse_double(get("core_share"), 0);
    auto ports = get("node_ports");
    auto dash = ports.find('-');
    i.node_first = static_cast<int>(parse_int(ports.substr(0, dash), 0));
    i.node_last = static_cast<int>(parse_int(ports.substr(dash + 1), 0));
    auto peers = get("peers");
    if (!peers.empty()) {
      i.peers = split_list(peers, 0);
    }
    if (!h.id.empty() && h.id != i.id) {
      return std::nullopt;
    }
    return i;
  } catch (const Error &) {
    return std::nullopt;
  }
}

LocalProvider::Info LocalProvider::require(const InstanceHandle & h) const
{
  auto info = read_info(h);
  if (!info) {
    throw Error(ErrorCode::kProvider, "no such instance " + h.deployment_id + "/" + h.name);
  }
  return *info;
}

std::optional<int> LocalProvider::process_group(const InstanceHandle & h) const
{
  auto info = read_info(h);
  if (!info || !group_alive(info->pgid)) {
    return std::nullopt;
  }
  return info->pgid;
}

std::map<std::string, std::string> LocalProvider::instance_env(const InstanceHandle & h) const
{
  auto i = require(h);
  std::ostringstream share;
  share << i.core_share;
  return {
    {"FOG_DEPLOYMENT", i.deployment},
    {"FOG_INSTANCE", i.name},
    {"FOG_INSTANCE_ROOT", instance_root(h).string()},
    {"FOG_WORKERS", std::to_string(i.workers)},
    {"FOG_GPU", i.gpu ? "1" : "0"},
    {"FOG_CORE_SHARE", share.str()},
    {"FOG_LISTEN_PORTS", std::to_string(i.base_port + i.node_first) + "-" +
      std::to_string(i.base_port + i.node_last)},
    {"FOG_PEER_ALLOWLIST", join_list(i.peers)},
    {"FOG_TOOLS_DIR", options_.tools_dir.string()},
    {"FOG_SHARE_DIR", FOG_SHARE_DIR},
  };
}

std::uint16_t LocalProvider::pick_block(const std::set<std::uint16_t> & skip) const
{
  std::set<std::uint16_t> used = skip;
  std::error_code ec;
  for (const auto & dep : fs::directory_iterator(options_.sandbox_root, ec)) {
    auto fname = dep.path().filename().string();
    if (fname.rfind("fog-", 0) != 0 || !dep.is_directory()) {
      continue;
    }
    for (const auto & inst : fs::directory_iterator(dep.path(), ec)) {
      auto text = read_file(inst.path() / kInfoFile);
      auto at = text.find("base_port = ");
      if (at != std::string::npos) {
        used.insert(static_cast<std::uint16_t>(std::atoi(text.c_str() + at + 12)));
      }
    }
  }
  auto listening = net::listening_ports();
  std::vector<std::uint16_t> candidates;
  for (int base = options_.first_port; base + kPortBlock - 1 <= options_.last_port; base += kPortBlock) {
    if (used.count(static_cast<std::uint16_t>(base))) {
      continue;
    }
    bool busy = false;
    for (int p = base; p < base + kPortBlock && !busy; ++p) {
      busy = listening.count(static_cast<std::uint16_t>(p)) > 0;
    }
    if (!busy) {
      candidates.push_back(static_cast<std::uint16_t>(base));
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kProvider, "no free port block");
  }
  std::random_device rd;
  return candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rd)];
}

InstanceHandle LocalProvider::create_instance(const std::string & deployment_id,
  const std::string & name, const manifest::MachineSpec & machine, const SecurityRules & rules)
{
  reap();
  if (!valid_component(deployment_id) || !valid_component(name)) {
    throw Error(ErrorCode::kProvider, "bad instance name '" + deployment_id + "/" + name + "'");
  }
  InstanceHandle h{deployment_id, name, random_hex(8)};
  auto root = instance_root(h);
  if (read_info(InstanceHandle{deployment_id, name, ""})) {
    throw Error(ErrorCode::kProvider, "instance " + name + " already exists");
  }
  fs::create_directories(root / "code");
  fs::create_directories(root / "setup");
  fs::create_directories(root / "logs");

  auto [node_first, node_last] = rules.node_port_range();
  std::set<std::uint16_t> failed;
  FileLock lock(options_.sandbox_root / ".fog-ports.lock");
  for (int attempt = 0; attempt < 4; ++attempt) {
    auto base = pick_block(failed);
    Info info;
    info.id = h.id;
    info.deployment = deployment_id;
    info.name = name;
    info.host = options_.host;
    info.base_port = base;
    info.instance_type = machine.instance_type;
    info.workers = machine.worker_count;
    info.gpu = machine.gpu;
    info.core_share = machine.core_share;
    info.node_first = node_first;
    info.node_last = node_last;
    info.peers.assign(rules.peer_allowlist.begin(), rules.peer_allowlist.end());

    std::string deny;
    for (int off = 0; off < kPortBlock; ++off) {
      if (off != kAgentOffset && !rules.allowed_ports.count(off)) {
        deny += (deny.empty() ? "" : ",") + std::to_string(base + off);
      }
    }
    SpawnSpec spec;
    spec.argv = {(options_.tools_dir / "fog-instance").string(), "serve",
      "--host", options_.host, "--agent-port", std::to_string(base + kAgentOffset),
      "--ready-file", (root / kReadyFile).string()};
    if (!deny.empty()) {
      spec.argv.push_back("--deny");
      spec.argv.push_back(deny);
    }
    // Write the info file first so the instance is listed before it exists.
    info.pgid = 0;
    write_atomic(root / kInfoFile, render_info(info));
    spec.cwd = root;
    spec.pgid = 0;
    int log = ::open((root / "logs" / "instance.log").c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    spec.out_fd = log;
    // Instance env needs the info file, so assemble it by hand here.
    std::ostringstream share;
    share << info.core_share;
    spec.env = {
      {"FOG_DEPLOYMENT", deployment_id},
      {"FOG_INSTANCE", name},
      {"FOG_PEER_ALLOWLIST", join_list(info.peers)},
      {"FOG_WORKERS", std::to_string(info.workers)},
      {"FOG_GPU", info.gpu ? "1" : "0"},
      {"FOG_CORE_SHARE", share.str()},
    };
    int pid = spawn(spec);
    if (log >= 0) {
      ::close(log);
    }
    if (pid < 0) {
      fs::remove_all(root);
      throw Error(ErrorCode::kProvider, std::string("cannot start instance supervisor: ") + std::strerror(-pid));
    }
    {
      std::lock_guard<std::mutex> g(mu_);
      children_.push_back(pid);
    }
    info.pgid = pid;
    write_atomic(root / kInfoFile, render_info(info));

    auto deadline = std::chrono::steady_clock::now() + options_.ready_timeout;
    bool ready = false;
    bool exited = false;
    while (std::chrono::steady_clock::now() < deadline) {
      if (fs::exists(root / kReadyFile)) {
        ready = true;
        break;
      }
      int st = 0;
      if (::waitpid(pid, &st, WNOHANG) == pid) {
        exited = true;
        break;
      }
      std::this_thread::sleep_for(5ms);
    }
    if (ready) {
      if (machine.startup_delay_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(machine.startup_delay_ms));
      }
      spdlog::info("instance {}/{} up at {}:{}", deployment_id, name, options_.host, base);
      return h;
    }
    if (!exited) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
    }
    spdlog::warn("instance supervisor for {} failed on block {}; retrying", name, base);
    failed.insert(base);
  }
  fs::remove_all(root);
  throw Error(ErrorCode::kProvider, "instance " + name + " did not start");
}

net::Address LocalProvider::address(const InstanceHandle & h)
{
  auto i = require(h);
  return {i.host, i.base_port};
}

void LocalProvider::push_files(const InstanceHandle & h, const std::vector<fs::path> & local,
  const std::string & remote_root)
{
  require(h);
  fs::path rel(remote_root);
  for (const auto & part : rel) {
    if (part == "..") {
      throw Error(ErrorCode::kProvider, "remote path escapes the sandbox: " + remote_root);
    }
  }
  auto dest = instance_root(h) / rel.relative_path();
  fs::create_directories(dest);
  for (const auto & src : local) {
    std::error_code ec;
    if (!fs::exists(src, ec)) {
      throw Error(ErrorCode::kProvider, "push: no such file " + src.string());
    }
    auto target = dest / src.filename();
    if (fs::is_directory(src)) {
      fs::copy(src, target, fs::copy_options::recursive | fs::copy_options::overwrite_existing, ec);
    } else {
      fs::copy_file(src, target, fs::copy_options::overwrite_existing, ec);
    }
    if (ec) {
      throw Error(ErrorCode::kProvider, "push " + src.string() + ": " + ec.message());
    }
  }
}

ExecResult LocalProvider::exec(const InstanceHandle & h, const ExecRequest & request)
{
  reap();
  auto info = require(h);
  if (!group_alive(info.pgid)) {
    throw Error(ErrorCode::kProvider, "instance " + h.name + " is not running");
  }
  if (request.argv.empty()) {
    throw Error(ErrorCode::kProvider, "exec: empty command");
  }
  auto root = instance_root(h);
  SpawnSpec spec;
  spec.argv = request.argv;
  if (spec.argv[0].find('/') != std::string::npos && fs::path(spec.argv[0]).is_relative()) {
    spec.argv[0] = (root / spec.argv[0]).string();
  }
  spec.env = instance_env(h);
  for (const auto & [k, v] : request.env) {
    spec.env[k] = v;
  }
  spec.cwd = root;
  spec.pgid = info.pgid;

  ExecResult result;
  if (request.detach) {
    auto name = request.log_name.empty() ? fs::path(request.argv[0]).filename().string() : request.log_name;
    auto log_path = root / "logs" / (name + ".log");
    int log = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    spec.out_fd = log;
    int pid = spawn(spec);
    if (log >= 0) {
      ::close(log);
    }
    if (pid < 0) {
      result.status = 127;
      result.output = request.argv[0] + ": " + std::strerror(-pid);
      return result;
    }
    std::this_thread::sleep_for(100ms);
    int st = 0;
    if (::waitpid(pid, &st, WNOHANG) == pid) {
      result.status = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
      if (result.status == 0) {
        result.status = 1;
      }
      result.output = tail(read_file(log_path), 4096);
      return result;
    }
    std::lock_guard<std::mutex> g(mu_);
    children_.push_back(pid);
    result.pid = pid;
    return result;
  }

  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kIo, "pipe failed");
  }
  spec.out_fd = fds[1];
  int pid = spawn(spec);
  ::close(fds[1]);
  if (pid < 0) {
    ::close(fds[0]);
    result.status = 127;
    result.output = request.argv[0] + ": " + std::strerror(-pid);
    return result;
  }
  auto deadline = std::chrono::steady_clock::now() + request.timeout;
  char buf[4096];
  bool timed_out = false;
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int n = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 200)));
    if (n <= 0) {
      continue;
    }
    ssize_t r = ::read(fds[0], buf, sizeof(buf));
    if (r <= 0) {
      break;
    }
    result.output.append(buf, static_cast<std::size_t>(r));
    if (result.output.size() > (1u << 20)) {
      result.output = tail(result.output, 1u << 16);
    }
  }
  ::close(fds[0]);
  if (timed_out) {
    ::kill(pid, SIGKILL);
  }
  int st = 0;
  ::waitpid(pid, &st, 0);
  result.status = timed_out ? 124 : (WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st));
  result.pid = pid;
  return result;
}

void LocalProvider::terminate(const InstanceHandle & h)
{
  auto info = read_info(InstanceHandle{h.deployment_id, h.name, h.id});
  if (!info) {
    return;
  }
  int pgid = info->pgid;
  auto stop_with = [&](int sig, std::chrono::milliseconds wait) {
      if (pgid > 0) {
        ::kill(-pgid, sig);
      }
      auto deadline = std::chrono::steady_clock::now() + wait;
      while (std::chrono::steady_clock::now() < deadline) {
        while (pgid > 0 && ::waitpid(-pgid, nullptr, WNOHANG) > 0) {
        }
        if (!group_alive(pgid)) {
          return true;
        }
        std::this_thread::sleep_for(10ms);
      }
      return false;
    };
  if (!stop_with(SIGTERM, 1500ms) && !stop_with(SIGKILL, 1000ms)) {
    throw Error(ErrorCode::kProvider, "instance " + h.name + " did not stop");
  }
  reap();
  std::error_code ec;
  fs::remove_all(instance_root(h), ec);
  auto dep = deployment_root(h.deployment_id);
  if (fs::is_empty(dep, ec)) {
    fs::remove(dep, ec);
  }
  spdlog::info("instance {}/{} terminated", h.deployment_id, h.name);
}

std::vector<InstanceHandle> LocalProvider::list_instances(const std::string & deployment_id)
{
  std::vector<InstanceHandle> out;
  std::error_code ec;
  auto dep = deployment_root(deployment_id);
  if (!fs::is_directory(dep, ec)) {
    return out;
  }
  for (const auto & e : fs::directory_iterator(dep, ec)) {
    if (!e.is_directory()) {
      continue;
    }
    InstanceHandle probe{deployment_id, e.path().filename().string(), ""};
    if (auto info = read_info(probe)) {
      probe.id = info->id;
      out.push_back(probe);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void LocalProvider::reap()
{
  std::lock_guard<std::mutex> g(mu_);
  children_.erase(std::remove_if(children_.begin(), children_.end(), [](int pid) {
      int st = 0;
      int r = ::waitpid(pid, &st, WNOHANG);
      return r == pid || (r < 0 && errno == ECHILD);
    }), children_.end());
}

}  // namespace fog::provision
