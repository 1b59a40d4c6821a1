// Copyright 2026 The apifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Straight-line programs of indexed statements.
//
// Every statement carries a unique index; references always point to a
// strictly smaller index. Programs produced by the generator are
// normalized (index == position), parsed programs keep the indices they
// were written with until Normalize() is called.

#ifndef APIFUZZ_PROGRAM_H_
#define APIFUZZ_PROGRAM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "apifuzz/manifest.h"
#include "apifuzz/value.h"

namespace apifuzz {

enum class CallRole { kPlain, kTarget, kRelative };
enum class FileMode { kRead, kWrite };

struct LoadStmt {
  TypeId type = kNoType;
  Value value;
  bool operator==(const LoadStmt&) const = default;
};

struct CallStmt {
  std::string name;
  CallRole role = CallRole::kPlain;
  bool tracked = false;
  std::vector<StmtIndex> args;
  bool operator==(const CallStmt&) const = default;
};

// Overwrites part of a call's return value at runtime.
struct UpdateStmt {
  StmtIndex dst = 0;
  FieldPath path;
  StmtIndex src = 0;
  bool operator==(const UpdateStmt&) const = default;
};

struct AssertStmt {
  enum class Rule { kNonNull, kEq };
  Rule rule = Rule::kNonNull;
  StmtIndex lhs = 0;
  StmtIndex rhs = 0;  // kEq only
  bool operator==(const AssertStmt&) const = default;
};

// A sandbox file. Its value is a `char*` naming the file; read-mode files
// are filled from `source` (a byte array) or with random bytes.
struct FileStmt {
  FileMode mode = FileMode::kRead;
  std::optional<StmtIndex> source;
  // Spelled `file option` in the input; kept so the program re-serializes
  // the same way.
  bool spelled_option = false;
  bool operator==(const FileStmt&) const = default;
};

struct Statement {
  StmtIndex index = 0;
  std::variant<LoadStmt, CallStmt, UpdateStmt, AssertStmt, FileStmt> body;

  bool is_load() const { return std::holds_alternative<LoadStmt>(body); }
  bool is_call() const { return std::holds_alternative<CallStmt>(body); }
  bool is_update() const { return std::holds_alternative<UpdateStmt>(body); }
  bool is_assert() const { return std::holds_alternative<AssertStmt>(body); }
  bool is_file() const { return std::holds_alternative<FileStmt>(body); }
  const LoadStmt& load() const { return std::get<LoadStmt>(body); }
  const CallStmt& call() const { return std::get<CallStmt>(body); }
  LoadStmt& load() { return std::get<LoadStmt>(body); }
  CallStmt& call() { return std::get<CallStmt>(body); }

  bool operator==(const Statement&) const = default;
};

// Indices a statement refers to, including refs nested in load values.
std::vector<StmtIndex> ReferencesOf(const Statement& s);

// Rewrites every index a statement refers to.
template <typename Fn>
void RemapReferences(Statement& s, Fn&& fn) {
  std::visit(
      [&](auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, LoadStmt>) {
          ForEachRefMutable(body.value, [&](LocationRef& r) { r.index = fn(r.index); });
        } else if constexpr (std::is_same_v<T, CallStmt>) {
          for (auto& a : body.args) a = fn(a);
        } else if constexpr (std::is_same_v<T, UpdateStmt>) {
          body.dst = fn(body.dst);
          body.src = fn(body.src);
        } else if constexpr (std::is_same_v<T, AssertStmt>) {
          body.lhs = fn(body.lhs);
          if (body.rule == AssertStmt::Rule::kEq) body.rhs = fn(body.rhs);
        } else if constexpr (std::is_same_v<T, FileStmt>) {
          if (body.source) body.source = fn(*body.source);
        }
      },
      s.body);
}

class Program {
 public:
  Program() = default;
  explicit Program(std::vector<Statement> statements) : statements_(std::move(statements)) {}

  const std::vector<Statement>& statements() const { return statements_; }
  std::vector<Statement>& mutable_statements() { return statements_; }
  size_t size() const { return statements_.size(); }
  bool empty() const { return statements_.empty(); }
  const Statement& operator[](size_t pos) const { return statements_[pos]; }
  Statement& operator[](size_t pos) { return statements_[pos]; }

  // Position of the statement with a given index.
  std::optional<size_t> PositionOf(StmtIndex index) const;
  std::optional<size_t> TargetPosition() const;

  // Checks the structural invariants: ascending unique indices, no forward
  // references, at most one target call, tracked only on calls (by
  // construction).
  absl::Status CheckStructure() const;

  // Renumbers statements 0..n-1 and rewrites references.
  void Normalize();

  // Inserts before `pos` in a normalized program; references to positions
  // >= pos shift by one.
  void InsertAt(size_t pos, Statement s);
  // Appends to a normalized program and returns the new index.
  StmtIndex Append(std::variant<LoadStmt, CallStmt, UpdateStmt, AssertStmt, FileStmt> body);

  // Removes the given positions from a normalized program. References to
  // removed statements must not remain.
  void ErasePositions(const std::vector<size_t>& positions);

  bool operator==(const Program&) const = default;

 private:
  std::vector<Statement> statements_;
};

// Positions of `pos` and of every statement that refers to it,
// transitively, in ascending order.
std::vector<size_t> DependentsOf(const Program& p, size_t pos);

// Type of the value a statement produces, or nullopt for statements that
// produce none (updates, asserts, void calls, unknown functions).
std::optional<TypeId> ProducedType(const Program& p, size_t pos, const Manifest& m);

}  // namespace apifuzz

#endif  // APIFUZZ_PROGRAM_H_
