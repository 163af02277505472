#pragma once

#include <stdexcept>
#include <string>

namespace pragrad {

// Bad or inconsistent input data; the CLI maps it to exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transport or protocol failure talking to a remote endpoint; exit status 2.
class RemoteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pragrad
