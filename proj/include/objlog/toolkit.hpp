#pragma once

// Headless demo classes: point, colour, area, graphical, box, text,
// picture, node and button, plus a synthetic event source.

#include <deque>
#include <string>

#include "objlog/engine.hpp"
#include "objlog/kernel.hpp"

namespace objlog {

// Defines the toolkit classes in the kernel.
void define_toolkit(Kernel& kernel);

// One line per graphical displayed on picture:
//   class@id pos=(x,y) fill=<name|nil>
std::string scene_dump(Kernel& kernel, ObjectId picture);

// FIFO of synthetic input events. Each event is delivered as
// send(Target, event(Event)) with a fresh event object.
class EventPump {
 public:
  explicit EventPump(Kernel& kernel) : kernel_(kernel) {}

  void post(ObjectId target, Symbol kind, std::int64_t x = 0, std::int64_t y = 0);
  // Delivers one event immediately; returns the outcome of the event method.
  bool deliver(ObjectId target, Symbol kind, std::int64_t x = 0, std::int64_t y = 0);
  // Delivers all queued events; returns how many succeeded.
  std::size_t run();
  std::size_t pending() const noexcept { return queue_.size(); }

  // pump_event/2,4, post_event/2,4, dispatch_events/1 and scene_dump/1.
  void install(Engine& engine, const std::function<ObjectId(const Term&)>& object_of);

 private:
  struct Pending {
    ObjectId target;
    Symbol kind;
    std::int64_t x, y;
  };
  Kernel& kernel_;
  std::deque<Pending> queue_;
};

}  // namespace objlog
