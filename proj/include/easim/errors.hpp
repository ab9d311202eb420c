#pragma once

#include <stdexcept>
#include <string>

namespace easim {

/// Base class for everything this library throws on bad input or bad state.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EASIM_DEFINE_ERROR(Name)        \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

EASIM_DEFINE_ERROR(ParseError);       // malformed trace / config / model file
EASIM_DEFINE_ERROR(ValidationError);  // structurally valid input violating a domain rule
EASIM_DEFINE_ERROR(ConfigError);      // bad option combination or unknown config key
EASIM_DEFINE_ERROR(OutOfRange);       // query outside a calibrated map's domain
EASIM_DEFINE_ERROR(IndexOutOfRange);  // frame / shard index outside its container
EASIM_DEFINE_ERROR(NotInitialized);   // predictor asked for output before any observation
EASIM_DEFINE_ERROR(DecodeError);      // erasure decode with fewer shards than data count
EASIM_DEFINE_ERROR(UnsupportedModel); // analytic result requested for a model without one
EASIM_DEFINE_ERROR(ZeroThroughput);   // arrival time queried under zero throughput
EASIM_DEFINE_ERROR(DegenerateTrace);  // trace too short / non-monotonic to be usable
EASIM_DEFINE_ERROR(EmptySession);     // session-level statistic over zero chunks
EASIM_DEFINE_ERROR(WrongClass);       // per-frame query that only applies to another class
EASIM_DEFINE_ERROR(MissingPrereq);    // figure/report asked for before its run exists

#undef EASIM_DEFINE_ERROR

/// Internal consistency violation. Raised by EASIM_ENSURE, which stays active
/// in release builds: a failed bookkeeping identity means results are wrong,
/// not slow.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {
[[noreturn]] inline void ensure_failed(const char* expr, const char* file, int line,
                                       const std::string& msg) {
  throw InvariantViolation(std::string(file) + ":" + std::to_string(line) +
                           ": invariant failed: " + expr + (msg.empty() ? "" : " (" + msg + ")"));
}
}  // namespace detail

#define EASIM_ENSURE(cond, msg)                                         \
  do {                                                                  \
    if (!(cond)) ::easim::detail::ensure_failed(#cond, __FILE__, __LINE__, (msg)); \
  } while (0)

}  // namespace easim
