#pragma once

#include <stdexcept>
#include <string>

namespace objlog {

// Base for runtime faults raised by the C++ layers. The bridge converts
// these into structured logic error terms.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A TermRef used after its frame was closed.
class StaleReferenceError : public Error {
 public:
  using Error::Error;
};

// Frames closed out of LIFO order.
class FrameOrderError : public Error {
 public:
  using Error::Error;
};

// Copying a cyclic (rational) term into a record.
class CyclicTermError : public Error {
 public:
  using Error::Error;
};

// A configured size limit was exceeded.
class ResourceError : public Error {
 public:
  ResourceError(std::string resource, const std::string& what)
      : Error(what), resource_(std::move(resource)) {}
  const std::string& resource() const { return resource_; }

 private:
  std::string resource_;
};

// Access to a record that has been destroyed.
class DeadRecordError : public Error {
 public:
  using Error::Error;
};

}  // namespace objlog
