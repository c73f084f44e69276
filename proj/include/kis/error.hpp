/*
 * Copyright 2026 The KIS Engine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kis {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corpus manifest, bank, or keyframe could not be loaded. `locus` names the
/// offending record, e.g. "shots[3].video_id" or "banks[0].matrix_file".
class LoadError : public Error {
 public:
  LoadError(std::string locus, const std::string& what)
      : Error(locus.empty() ? what : locus + ": " + what), locus_(std::move(locus)) {}
  const std::string& locus() const noexcept { return locus_; }

 private:
  std::string locus_;
};

/// A query or request argument violates its documented preconditions.
class InvalidQuery : public Error {
 public:
  using Error::Error;
};

/// A modality of a composite query failed. Carries the modality tag and, for
/// concept syntax errors, the character offset.
class ModalityError : public Error {
 public:
  ModalityError(std::string modality, const std::string& what, std::optional<std::size_t> offset = std::nullopt,
                std::vector<std::string> suggestions = {})
      : Error(modality + ": " + what),
        modality_(std::move(modality)),
        offset_(offset),
        suggestions_(std::move(suggestions)) {}
  const std::string& modality() const noexcept { return modality_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }
  const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

 private:
  std::string modality_;
  std::optional<std::size_t> offset_;
  std::vector<std::string> suggestions_;
};

/// Session state errors.
class SessionError : public Error {
 public:
  enum class Reason { not_found, expired, ended, precondition };
  SessionError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Concept query syntax error; `offset` is the 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset), message_(what) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

/// A label in a concept query does not resolve against its bank.
class UnresolvedLabelError : public Error {
 public:
  UnresolvedLabelError(std::string label, std::vector<std::string> suggestions)
      : Error(describe(label, suggestions)), label_(std::move(label)), suggestions_(std::move(suggestions)) {}
  const std::string& label() const noexcept { return label_; }
  const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

 private:
  static std::string describe(const std::string& label, const std::vector<std::string>& suggestions) {
    std::string msg = "unresolved label '" + label + "'";
    if (!suggestions.empty()) {
      msg += "; did you mean:";
      for (const auto& s : suggestions) msg += " " + s;
    }
    return msg;
  }

  std::string label_;
  std::vector<std::string> suggestions_;
};

}  // namespace kis
