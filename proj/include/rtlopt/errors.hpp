#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rtlopt {

struct NotAModule : std::runtime_error {
  explicit NotAModule(const std::string& what) : std::runtime_error(what) {}
};

struct IngestError : std::runtime_error {
  explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientCorpus : std::runtime_error {
  explicit InsufficientCorpus(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientPairs : std::runtime_error {
  InsufficientPairs(std::size_t available, std::size_t requested)
      : std::runtime_error("insufficient pairs: requested " + std::to_string(requested) +
                           ", available " + std::to_string(available)),
        available(available), requested(requested)
  {}
  std::size_t available;
  std::size_t requested;
};

struct BackendUnavailable : std::runtime_error {
  explicit BackendUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct MeasurementFailed : std::runtime_error {
  explicit MeasurementFailed(const std::string& what) : std::runtime_error(what) {}
};

struct IncomparableMetrics : std::runtime_error {
  explicit IncomparableMetrics(const std::string& what) : std::runtime_error(what) {}
};

struct EndpointUnreachable : std::runtime_error {
  explicit EndpointUnreachable(const std::string& what) : std::runtime_error(what) {}
};

// Programming-error guard: a cloud-bound prompt reached generate() without a
// matching audit clearance. Raised before any network I/O.
struct AuditNotCleared : std::logic_error {
  explicit AuditNotCleared(const std::string& what) : std::logic_error(what) {}
};

struct LeakageDetected : std::runtime_error {
  explicit LeakageDetected(const std::string& what,
                           std::vector<std::string> spans = {})
      : std::runtime_error(what), offending_spans(std::move(spans))
  {}
  std::vector<std::string> offending_spans;
};

struct EmptyResponse : std::runtime_error {
  explicit EmptyResponse(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rtlopt
