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

#include "apifuzz/program.h"

#include <algorithm>
#include <unordered_map>

#include "absl/strings/str_cat.h"

namespace apifuzz {

std::vector<StmtIndex> ReferencesOf(const Statement& s) {
  std::vector<StmtIndex> out;
  if (const auto* load = std::get_if<LoadStmt>(&s.body)) {
    ForEachRef(load->value, [&](const LocationRef& r) { out.push_back(r.index); });
  } else if (const auto* call = std::get_if<CallStmt>(&s.body)) {
    out = call->args;
  } else if (const auto* update = std::get_if<UpdateStmt>(&s.body)) {
    out = {update->dst, update->src};
  } else if (const auto* check = std::get_if<AssertStmt>(&s.body)) {
    out.push_back(check->lhs);
    if (check->rule == AssertStmt::Rule::kEq) out.push_back(check->rhs);
  } else if (const auto* file = std::get_if<FileStmt>(&s.body)) {
    if (file->source) out.push_back(*file->source);
  }
  return out;
}

std::optional<size_t> Program::PositionOf(StmtIndex index) const {
  auto it = std::lower_bound(statements_.begin(), statements_.end(), index,
                             [](const Statement& s, StmtIndex i) { return s.index < i; });
  if (it == statements_.end() || it->index != index) return std::nullopt;
  return static_cast<size_t>(it - statements_.begin());
}

std::optional<size_t> Program::TargetPosition() const {
  for (size_t i = 0; i < statements_.size(); ++i) {
    const auto* call = std::get_if<CallStmt>(&statements_[i].body);
    if (call != nullptr && call->role == CallRole::kTarget) return i;
  }
  return std::nullopt;
}

absl::Status Program::CheckStructure() const {
  int targets = 0;
  for (size_t pos = 0; pos < statements_.size(); ++pos) {
    const Statement& s = statements_[pos];
    if (pos > 0 && s.index <= statements_[pos - 1].index) {
      return absl::InvalidArgumentError(
          absl::StrCat("statement <", s.index, "> is not in ascending index order"));
    }
    for (StmtIndex ref : ReferencesOf(s)) {
      if (ref >= s.index) {
        return absl::InvalidArgumentError(
            absl::StrCat("statement <", s.index, "> refers forward to <", ref, ">"));
      }
      if (!PositionOf(ref)) {
        return absl::InvalidArgumentError(
            absl::StrCat("statement <", s.index, "> refers to missing <", ref, ">"));
      }
    }
    if (const auto* call = std::get_if<CallStmt>(&s.body)) {
      if (call->role == CallRole::kTarget && ++targets > 1) {
        return absl::InvalidArgumentError("more than one target call");
      }
    }
  }
  return absl::OkStatus();
}

void Program::Normalize() {
  std::unordered_map<StmtIndex, StmtIndex> remap;
  for (size_t pos = 0; pos < statements_.size(); ++pos) {
    remap[statements_[pos].index] = static_cast<StmtIndex>(pos);
  }
  for (size_t pos = 0; pos < statements_.size(); ++pos) {
    statements_[pos].index = static_cast<StmtIndex>(pos);
    RemapReferences(statements_[pos], [&](StmtIndex i) {
      auto it = remap.find(i);
      return it == remap.end() ? i : it->second;
    });
  }
}

void Program::InsertAt(size_t pos, Statement s) {
  auto shift = [pos](StmtIndex i) { return i >= pos ? i + 1 : i; };
  for (size_t k = pos; k < statements_.size(); ++k) {
    statements_[k].index += 1;
    RemapReferences(statements_[k], shift);
  }
  s.index = static_cast<StmtIndex>(pos);
  statements_.insert(statements_.begin() + static_cast<ptrdiff_t>(pos), std::move(s));
}

StmtIndex Program::Append(std::variant<LoadStmt, CallStmt, UpdateStmt, AssertStmt, FileStmt> body) {
  auto index = static_cast<StmtIndex>(statements_.size());
  statements_.push_back(Statement{index, std::move(body)});
  return index;
}

void Program::ErasePositions(const std::vector<size_t>& positions) {
  std::vector<bool> drop(statements_.size(), false);
  for (size_t p : positions) {
    if (p < drop.size()) drop[p] = true;
  }
  std::vector<Statement> kept;
  kept.reserve(statements_.size());
  for (size_t pos = 0; pos < statements_.size(); ++pos) {
    if (!drop[pos]) kept.push_back(std::move(statements_[pos]));
  }
  statements_ = std::move(kept);
  Normalize();
}

std::vector<size_t> DependentsOf(const Program& p, size_t pos) {
  std::vector<bool> hit(p.size(), false);
  std::vector<size_t> out;
  if (pos >= p.size()) return out;
  hit[pos] = true;
  out.push_back(pos);
  for (size_t q = pos + 1; q < p.size(); ++q) {
    for (StmtIndex r : ReferencesOf(p[q])) {
      auto rp = p.PositionOf(r);
      if (rp && hit[*rp]) {
        hit[q] = true;
        out.push_back(q);
        break;
      }
    }
  }
  return out;
}

std::optional<TypeId> ProducedType(const Program& p, size_t pos, const Manifest& m) {
  const Statement& s = p[pos];
  if (const auto* load = std::get_if<LoadStmt>(&s.body)) return load->type;
  if (const auto* call = std::get_if<CallStmt>(&s.body)) {
    const FuncSig* sig = m.FindFunction(call->name);
    if (sig == nullptr || m.types().IsVoid(sig->ret)) return std::nullopt;
    return sig->ret;
  }
  if (s.is_file()) return m.types().CharPtrType();
  return std::nullopt;
}

}  // namespace apifuzz
