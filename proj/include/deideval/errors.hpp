#pragma once

#include <stdexcept>
#include <string>

namespace deideval {

// Base class for all harness errors. Subclasses exist so callers can react
// to a specific failure without string-matching messages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// --- corpus ---

class MissingFileError : public Error {
 public:
  explicit MissingFileError(const std::string& path)
      : Error("missing file: " + path), path(path) {}
  std::string path;
};

class MalformedRecordError : public Error {
 public:
  MalformedRecordError(std::size_t line, const std::string& reason)
      : Error("malformed record at line " + std::to_string(line) + ": " + reason),
        line(line) {}
  std::size_t line;
};

class DuplicateNoteIdError : public Error {
 public:
  explicit DuplicateNoteIdError(const std::string& id)
      : Error("duplicate note id: " + id), id(id) {}
  std::string id;
};

class DanglingGoldReferenceError : public Error {
 public:
  explicit DanglingGoldReferenceError(const std::string& note_id)
      : Error("gold entity references unknown note: " + note_id), note_id(note_id) {}
  std::string note_id;
};

// --- normalizer ---

class EmptySurfaceError : public Error {
 public:
  EmptySurfaceError() : Error("entity surface is empty after trimming") {}
};

// --- gateway ---

class UnknownBackendError : public Error {
 public:
  explicit UnknownBackendError(const std::string& backend_id)
      : Error("unknown backend: " + backend_id), backend_id(backend_id) {}
  std::string backend_id;
};

class ExhaustedRetriesError : public Error {
 public:
  ExhaustedRetriesError(const std::string& backend_id, int last_status, int attempts)
      : Error("backend " + backend_id + " failed after " + std::to_string(attempts) +
              " attempts (last status " + std::to_string(last_status) + ")"),
        last_status(last_status),
        attempts(attempts) {}
  int last_status;  // 0 means transport-level failure
  int attempts;
};

class FixtureMissError : public Error {
 public:
  explicit FixtureMissError(const std::string& digest)
      : Error("scripted backend has no fixture for digest " + digest), digest(digest) {}
  std::string digest;
};

class OfflineViolationError : public Error {
 public:
  explicit OfflineViolationError(const std::string& backend_id)
      : Error("offline mode forbids network call via backend " + backend_id) {}
};

// --- parsing (extraction + judge) ---

class ParseFailureError : public Error {
 public:
  explicit ParseFailureError(const std::string& reason)
      : Error("completion parse failure: " + reason), reason(reason) {}
  std::string reason;
};

class NonIntegerCountError : public Error {
 public:
  explicit NonIntegerCountError(const std::string& got)
      : Error("\"Number of Correct Pairs\" is not an integer: " + got) {}
};

// --- metrics ---

class CountExceedsPredictionsError : public Error {
 public:
  CountExceedsPredictionsError(long long num_correct, long long num_predictions)
      : Error("correct count " + std::to_string(num_correct) +
              " exceeds prediction count " + std::to_string(num_predictions)) {}
};

class ZeroTokenCorpusError : public Error {
 public:
  ZeroTokenCorpusError() : Error("coverage undefined: corpus has zero tokens") {}
};

class EmptyRunError : public Error {
 public:
  EmptyRunError() : Error("no model produced any prediction; mean prediction count undefined") {}
};

class MissingVerdictsError : public Error {
 public:
  MissingVerdictsError(const std::string& model_id, std::size_t count)
      : Error("missing " + std::to_string(count) + " verdict(s) for model " + model_id),
        model_id(model_id),
        count(count) {}
  std::string model_id;
  std::size_t count;
};

// --- voting ---

class InconsistentModelSetsError : public Error {
 public:
  using Error::Error;
};

class VoterFailureError : public Error {
 public:
  explicit VoterFailureError(const std::string& reason)
      : Error("voter failure: " + reason) {}
};

// --- goldeval ---

class NoGoldAnnotationsError : public Error {
 public:
  NoGoldAnnotationsError() : Error("corpus carries no gold annotations") {}
};

}  // namespace deideval
