#pragma once

// One complete session: logic engine, object kernel, host-data layer,
// bridge, class compiler and demo toolkit wired together.

#include <map>
#include <string>
#include <string_view>

#include "objlog/bridge.hpp"
#include "objlog/class_compiler.hpp"
#include "objlog/engine.hpp"
#include "objlog/host_data.hpp"
#include "objlog/kernel.hpp"
#include "objlog/store.hpp"
#include "objlog/toolkit.hpp"

namespace objlog {

struct RuntimeOptions {
  bool eager = false;  // realize compiled classes at load time
  bool occurs_check = false;
  bool trace = false;
};

class Runtime {
 public:
  explicit Runtime(RuntimeOptions options = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  Engine& engine() noexcept { return engine_; }
  Kernel& kernel() noexcept { return kernel_; }
  FrameStack& frames() noexcept { return frames_; }
  RecordStore& records() noexcept { return records_; }
  HostData& host() noexcept { return host_; }
  Bridge& bridge() noexcept { return bridge_; }
  ClassCompiler& compiler() noexcept { return compiler_; }
  EventPump& pump() noexcept { return pump_; }

  LoadReport consult_file(const std::string& path) { return engine_.consult_file(path); }
  LoadReport consult_string(std::string_view text, const std::string& source = "user") {
    return engine_.consult_string(text, source);
  }
  // Bundled example sources by name (my_box, my_node, bench, choice).
  static const std::map<std::string, std::string_view>& demos();
  LoadReport load_demo(const std::string& name);

  // Object reference in a query result: @N or @name.
  ObjectId object_of(const Term& t) { return bridge_.object_of(t); }

  // Counter summary, one "name: value" per line.
  std::string stats_text() const;
  // Class table, one line per class: "name < super  slots=N send=N get=N".
  std::string classes_text() const;

 private:
  Engine engine_;
  FrameStack frames_;
  RecordStore records_;
  Kernel kernel_;
  HostData host_;
  Bridge bridge_;
  ClassCompiler compiler_;
  EventPump pump_;
};

}  // namespace objlog
