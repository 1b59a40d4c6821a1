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


#include "apifuzz/generator.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "apifuzz/dsl.h"

namespace apifuzz {
namespace {

uint64_t UniformIndex(Rng& rng, uint64_t n) { return n <= 1 ? 0 : rng() % n; }

double Unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index drawn with probability proportional to `weights`.
std::optional<size_t> Weighted(Rng& rng, const std::vector<uint64_t>& weights) {
  uint64_t total = 0;
  for (uint64_t w : weights) total += w;
  if (total == 0) return std::nullopt;
  uint64_t r = rng() % total;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  return std::nullopt;
}

void Terminate(Value& v) {
  auto* bs = std::get_if<ByteSeq>(&v.payload);
  if (bs == nullptr) return;
  if (bs->bytes.empty() || bs->bytes.back() != 0) bs->bytes.push_back(0);
}

bool IsCharVec(const TypeRegistry& reg, TypeId t) {
  const TypeDesc& d = reg.Resolved(t);
  return d.kind() == TypeKind::kArray && reg.Same(d.array().element, reg.CharType());
}

// Appends a slice program to `p` and returns the index of its value.
StmtIndex Splice(Program& p, const Slice& slice) {
  auto offset = static_cast<StmtIndex>(p.size());
  for (Statement s : slice.program.statements()) {
    s.index += offset;
    RemapReferences(s, [&](StmtIndex i) { return i + offset; });
    p.mutable_statements().push_back(std::move(s));
  }
  return offset + static_cast<StmtIndex>(slice.value);
}

}  // namespace

absl::Status GenConfig::Check() const {
  for (double prob : {reuse_threshold, call_gen_threshold, relative_insert_prob, null_pointer_prob}) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat("probability ", prob, " is outside [0, 1]"));
    }
  }
  if (max_statements == 0 || max_depth <= 0 || value_budget <= 0) {
    return absl::InvalidArgumentError("statement, depth and value limits must be positive");
  }
  return absl::OkStatus();
}

void SeedPool::Add(SeedEntry e) { entries_.push_back(std::move(e)); }

void SeedPool::Tick() {
  for (auto& e : entries_) ++e.age;
}

std::vector<double> SeedPool::SelectionWeights() const {
  std::vector<double> w(entries_.size());
  if (entries_.empty()) return w;
  double total = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::ldexp(1.0, -static_cast<int>(std::min<uint64_t>(entries_[i].age, 1000)));
    total += w[i];
  }
  double floor = 1.0 / static_cast<double>(w.size());
  double sum = 0;
  for (double& x : w) {
    x = std::max(x / total, floor);
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

size_t SeedPool::Select(Rng& rng) const {
  auto w = SelectionWeights();
  double r = Unit(rng);
  for (size_t i = 0; i < w.size(); ++i) {
    if (r < w[i]) return i;
    r -= w[i];
  }
  return w.empty() ? 0 : w.size() - 1;
}

Generator::Generator(const Manifest& m, GenConfig cfg) : m_(m), reg_(m.types()), cfg_(cfg) {}

bool Generator::Chance(Rng& rng, double prob) const { return Unit(rng) < prob; }

std::optional<StmtIndex> Generator::ReuseCandidate(const Program& p, TypeId type, Rng& rng) const {
  std::vector<StmtIndex> found;
  for (size_t q = 0; q < p.size(); ++q) {
    auto t = ProducedType(p, q, m_);
    if (t && reg_.Same(*t, type)) found.push_back(p[q].index);
  }
  if (found.empty()) return std::nullopt;
  return found[UniformIndex(rng, found.size())];
}

absl::StatusOr<StmtIndex> Generator::FreshLoad(Program& p, TypeId type, Rng& rng, bool allow_null) {
  const TypeDesc& d = reg_.Resolved(type);
  auto load = [&](TypeId t, Value v) { return p.Append(LoadStmt{t, std::move(v)}); };
  if (d.kind() == TypeKind::kOpaque || d.kind() == TypeKind::kVoid) {
    return absl::FailedPreconditionError(
        absl::StrCat("no value of '", reg_.Get(type).name, "' can be built"));
  }
  if (d.kind() != TypeKind::kPointer) {
    auto v = GenerateValue(reg_, type, rng, cfg_.value_budget, cfg_.values);
    if (!v.ok()) return v.status();
    return load(type, *std::move(v));
  }
  TypeId pointee = d.pointer().pointee;
  TypeKind pk = reg_.KindOf(pointee);
  bool bare_void = reg_.IsBareVoidPointer(type);
  if (!bare_void && (pk == TypeKind::kOpaque || pk == TypeKind::kVoid)) {
    return absl::FailedPreconditionError(
        absl::StrCat("no value of '", reg_.Get(type).name, "' can be built"));
  }
  if (allow_null && Chance(rng, cfg_.null_pointer_prob)) return load(type, Value{type, NullValue{}});
  TypeId target_type;
  Value target;
  if (bare_void || reg_.IsStringPointer(type)) {
    TypeId elem = bare_void ? reg_.CharType() : pointee;
    auto vec = reg_.VecOf(elem);
    if (!vec) vec = reg_.VecOf(reg_.Resolve(elem));
    if (!vec) return absl::InternalError(absl::StrCat("Vec of '", reg_.Get(elem).name, "' missing"));
    auto v = GenerateValue(reg_, *vec, rng, cfg_.value_budget, cfg_.values);
    if (!v.ok()) return v.status();
    target_type = *vec;
    target = *std::move(v);
    if (IsCharVec(reg_, target_type)) Terminate(target);
  } else {
    auto v = GenerateValue(reg_, pointee, rng, cfg_.value_budget, cfg_.values);
    if (!v.ok()) return v.status();
    target_type = pointee;
    target = *std::move(v);
  }
  StmtIndex at = load(target_type, std::move(target));
  return load(type, Value{type, LocationRef{at, {}, true}});
}

std::optional<StmtIndex> Generator::Producer(Program& p, TypeId type, Rng& rng, int depth) {
  if (p.size() >= cfg_.max_statements || depth > cfg_.max_depth) return std::nullopt;
  const auto& ret = m_.ProducersOf(type);
  const auto& out = m_.OutParamProducersOf(type);
  size_t n = ret.size() + out.size();
  if (n == 0) return std::nullopt;
  size_t pick = UniformIndex(rng, n);
  size_t mark = p.size();
  auto rollback = [&] { p.mutable_statements().resize(mark); };
  if (pick < ret.size()) {
    auto idx = GenerateCallWith(p, m_.functions()[ret[pick]], rng, depth, {});
    if (!idx.ok()) {
      rollback();
      return std::nullopt;
    }
    if (reg_.IsPointer(type)) p.Append(AssertStmt{AssertStmt::Rule::kNonNull, *idx, 0});
    return *idx;
  }
  const auto& [fn, param] = out[pick - ret.size()];
  const FuncSig& sig = m_.functions()[fn];
  TypeId holder = sig.params[param].type;
  StmtIndex slot = p.Append(LoadStmt{type, Value{type, NullValue{}}});
  StmtIndex addr = p.Append(LoadStmt{holder, Value{holder, LocationRef{slot, {}, true}}});
  auto idx = GenerateCallWith(p, sig, rng, depth, {{param, addr}});
  if (!idx.ok()) {
    rollback();
    return std::nullopt;
  }
  p.Append(AssertStmt{AssertStmt::Rule::kNonNull, slot, 0});
  return slot;
}

absl::StatusOr<StmtIndex> Generator::GenerateArg(Program& p, TypeId type, Rng& rng, int depth,
                                                 bool allow_reuse) {
  if (allow_reuse && Chance(rng, cfg_.reuse_threshold)) {
    if (auto idx = ReuseCandidate(p, type, rng)) return *idx;
  }
  if (!reg_.IsPrimitive(type) && Chance(rng, cfg_.call_gen_threshold)) {
    if (auto idx = Producer(p, type, rng, depth + 1)) return *idx;
  }
  size_t mark = p.size();
  auto fresh = FreshLoad(p, type, rng, true);
  if (fresh.ok()) return fresh;
  p.mutable_statements().resize(mark);
  if (auto idx = Producer(p, type, rng, depth + 1)) return *idx;
  bool has_producer = !m_.ProducersOf(type).empty() || !m_.OutParamProducersOf(type).empty();
  if (has_producer && reg_.IsPointer(type)) {
    return p.Append(LoadStmt{type, Value{type, NullValue{}}});
  }
  return fresh.status();
}

absl::StatusOr<StmtIndex> Generator::GenerateCall(Program& p, const FuncSig& sig, Rng& rng,
                                                  int depth) {
  return GenerateCallWith(p, sig, rng, depth, {});
}

absl::StatusOr<StmtIndex> Generator::GenerateCallWith(Program& p, const FuncSig& sig, Rng& rng,
                                                      int depth,
                                                      const std::map<size_t, StmtIndex>& forced) {
  CallStmt call;
  call.name = sig.name;
  for (size_t i = 0; i < sig.params.size(); ++i) {
    if (auto it = forced.find(i); it != forced.end()) {
      call.args.push_back(it->second);
      continue;
    }
    TypeId t = sig.params[i].type;
    if (arg_cache_ != nullptr && !reg_.IsPrimitive(t) && p.size() < cfg_.max_statements &&
        Chance(rng, 0.25)) {
      const auto* slices = arg_cache_->Get(sig.name, sig.params[i].name);
      if (slices != nullptr && !slices->empty()) {
        call.args.push_back(Splice(p, (*slices)[UniformIndex(rng, slices->size())]));
        continue;
      }
    }
    auto arg = GenerateArg(p, t, rng, depth, true);
    if (!arg.ok()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "cannot build argument '", sig.params[i].name, "' of '", sig.name, "': ", arg.status().message()));
    }
    call.args.push_back(*arg);
  }
  return p.Append(std::move(call));
}

std::optional<size_t> Generator::PickRelative(const Program& p, size_t call_pos, Rng& rng) const {
  const std::string& name = p[call_pos].call().name;
  const FuncSig* sig = m_.FindFunction(name);
  std::vector<size_t> fns;
  std::vector<uint64_t> weights;
  for (size_t f = 0; f < m_.functions().size(); ++f) {
    const FuncSig& other = m_.functions()[f];
    if (other.name == name) continue;
    uint64_t w = 0;
    if (relations_ != nullptr) {
      if (relations_->HasEffective(other.name, name)) w += 3;
      if (relations_->HasStatic(other.name, name)) w += 1;
    } else {
      for (const auto& a : other.params) {
        for (const auto& b : sig->params) {
          if (!reg_.IsPrimitive(a.type) && reg_.Same(a.type, b.type) &&
              !reg_.IsStringPointer(a.type) && !reg_.IsBareVoidPointer(a.type)) {
            w = 1;
          }
        }
      }
    }
    if (w > 0) {
      fns.push_back(f);
      weights.push_back(w);
    }
  }
  auto i = Weighted(rng, weights);
  if (!i) return std::nullopt;
  return fns[*i];
}

absl::StatusOr<Program> Generator::PilotRound(const FuncSig& api, Rng& rng) {
  Program p;
  auto idx = GenerateCall(p, api, rng, 0);
  if (!idx.ok()) return idx.status();
  CallStmt& target = p[*idx].call();
  target.role = CallRole::kTarget;
  target.tracked = true;
  if (Chance(rng, cfg_.relative_insert_prob)) {
    if (auto rel = PickRelative(p, *idx, rng)) {
      Program q = p;
      bool ok = true;
      InsertBefore(q, *idx, [&](Program& pre) {
        auto made = GenerateCall(pre, m_.functions()[*rel], rng, 1);
        if (made.ok()) {
          pre[*made].call().role = CallRole::kRelative;
        } else {
          ok = false;
        }
      });
      if (ok) p = std::move(q);
    }
  }
  return p;
}

std::vector<uint64_t> Generator::StatementWeights(const Program& p) const {
  std::vector<uint64_t> w(p.size(), 0);
  for (size_t q = 0; q < p.size(); ++q) {
    if (p[q].is_load()) {
      w[q] = 1 + MutationPoints(reg_, p[q].load().value);
    } else if (p[q].is_call()) {
      w[q] = 1 + p[q].call().args.size();
    }
  }
  return w;
}

Program Generator::MutateCall(const Program& p, size_t call_pos, Rng& rng,
                              std::vector<size_t>* inserted) {
  const FuncSig* sig = m_.FindFunction(p[call_pos].call().name);
  if (sig == nullptr) return p;
  enum { kReplaceArg, kInsertRelative, kUpdateReturn };
  std::vector<int> order = {kReplaceArg, kInsertRelative, kUpdateReturn};
  std::shuffle(order.begin(), order.end(), rng);
  for (int strategy : order) {
    Program q = p;
    switch (strategy) {
      case kReplaceArg: {
        if (sig->params.empty()) break;
        size_t i = UniformIndex(rng, sig->params.size());
        std::optional<StmtIndex> arg;
        size_t added = InsertBefore(q, call_pos, [&](Program& pre) {
          auto made = GenerateArg(pre, sig->params[i].type, rng, 0, true);
          if (made.ok()) arg = *made;
        });
        if (!arg || *arg == p[call_pos].call().args[i]) break;
        q[call_pos + added].call().args[i] = *arg;
        return q;
      }
      case kInsertRelative: {
        auto rel = PickRelative(q, call_pos, rng);
        if (!rel) break;
        std::optional<StmtIndex> made;
        size_t added = InsertBefore(q, call_pos, [&](Program& pre) {
          size_t mark = pre.size();
          auto c = GenerateCall(pre, m_.functions()[*rel], rng, 1);
          if (c.ok()) {
            pre[*c].call().role = CallRole::kRelative;
            made = *c;
          } else {
            pre.mutable_statements().resize(mark);
          }
        });
        if (!made) break;
        if (inserted != nullptr) {
          for (size_t& pos : *inserted) {
            if (pos >= call_pos) pos += added;
          }
          inserted->push_back(*made);
        }
        return q;
      }
      case kUpdateReturn: {
        TypeId ret = sig->ret;
        if (reg_.IsVoid(ret)) break;
        FieldPath path;
        TypeId record = ret;
        if (reg_.IsPointer(ret)) {
          record = reg_.Resolved(ret).pointer().pointee;
          path.segments.push_back(uint64_t{0});
        }
        if (reg_.KindOf(record) != TypeKind::kRecord) break;
        const auto& fields = reg_.Resolved(record).record().fields;
        if (fields.empty()) break;
        const RecordField& f = fields[UniformIndex(rng, fields.size())];
        path.segments.push_back(f.name);
        TypeId src_type = f.type;
        if (reg_.IsPointer(f.type)) {
          TypeId pointee = reg_.Resolved(f.type).pointer().pointee;
          TypeKind pk = reg_.KindOf(pointee);
          if (pk == TypeKind::kRecord || pk == TypeKind::kPrimitive) src_type = pointee;
        }
        auto value = GenerateValue(reg_, src_type, rng, cfg_.value_budget, cfg_.values);
        if (!value.ok()) break;
        InsertBefore(q, call_pos + 1, [&](Program& pre) {
          StmtIndex src = pre.Append(LoadStmt{src_type, *std::move(value)});
          pre.Append(UpdateStmt{p[call_pos].index, path, src});
        });
        return q;
      }
    }
  }
  return p;
}

Program Generator::MutateLoad(const Program& p, size_t pos, Rng& rng) {
  const LoadStmt& load = p[pos].load();
  std::vector<StmtIndex> candidates;
  if (reg_.IsPointer(load.type)) {
    TypeId pointee = reg_.Resolved(load.type).pointer().pointee;
    bool any = reg_.IsVoid(pointee);
    for (size_t q = 0; q < pos; ++q) {
      if (!p[q].is_load()) continue;
      TypeId t = p[q].load().type;
      const TypeDesc& d = reg_.Resolved(t);
      if (any || reg_.Same(t, pointee) ||
          (d.kind() == TypeKind::kArray && reg_.Same(d.array().element, pointee))) {
        candidates.push_back(p[q].index);
      }
    }
  }
  MutationInputs in{cmp_literals_, candidates};
  MutationOutcome out = MutateValue(reg_, load.value, rng, in, cfg_.values);
  Program q = p;
  q[pos].load().value = std::move(out.value);
  if (IsCharVec(reg_, load.type) && !reg_.Resolved(load.type).array().fixed_len) {
    Terminate(q[pos].load().value);
  }
  if (!out.request) return q;
  const MutationRequest& req = *out.request;
  std::optional<StmtIndex> made;
  bool address = true;
  size_t mark = 0;
  size_t added = InsertBefore(q, pos, [&](Program& pre) {
    mark = pre.size();
    if (req.kind == MutationRequest::Kind::kFreshCall) {
      made = Producer(pre, req.pointer_type, rng, 1);
      address = false;
      return;
    }
    auto fresh = FreshLoad(pre, req.pointer_type, rng, false);
    if (!fresh.ok()) {
      pre.mutable_statements().resize(mark);
      return;
    }
    // Keep the pointee, drop the pointer load FreshLoad built around it.
    const Value& ptr = pre[*fresh].load().value;
    made = std::get<LocationRef>(ptr.payload).index;
    pre.mutable_statements().pop_back();
  });
  Value* slot = MutableValueAt(q[pos + added].load().value, reg_, req.path);
  if (!made || slot == nullptr) return p;
  slot->payload = LocationRef{*made, {}, address};
  return q;
}

std::optional<StmtIndex> Generator::ProduceNonNull(Program& p, size_t pos, TypeId pointer_type,
                                                   Rng& rng) {
  std::optional<StmtIndex> made;
  InsertBefore(p, pos, [&](Program& pre) {
    made = Producer(pre, pointer_type, rng, 1);
    if (made) return;
    size_t mark = pre.size();
    auto fresh = FreshLoad(pre, pointer_type, rng, false);
    if (fresh.ok()) {
      made = *fresh;
    } else {
      pre.mutable_statements().resize(mark);
    }
  });
  return made;
}

absl::StatusOr<Candidate> Generator::EvolveRound(const SeedPool& pool, const ConstraintStore* store,
                                                 Rng& rng) {
  if (pool.empty()) return absl::FailedPreconditionError("seed pool is empty");
  Candidate c;
  c.seed = pool.Select(rng);
  Program p = pool.entries()[c.seed].program;
  for (auto& s : p.mutable_statements()) {
    if (s.is_call() && s.call().role == CallRole::kRelative) s.call().role = CallRole::kPlain;
  }
  auto weights = StatementWeights(p);
  size_t picks = 1;
  while (picks < 4 && Chance(rng, 0.5)) ++picks;
  std::set<size_t, std::greater<>> chosen;
  for (size_t i = 0; i < picks; ++i) {
    if (auto w = Weighted(rng, weights)) chosen.insert(*w);
  }
  c.picked.assign(chosen.rbegin(), chosen.rend());
  for (size_t pos : chosen) {
    if (p[pos].is_load()) {
      p = MutateLoad(p, pos, rng);
    } else if (p[pos].is_call()) {
      p = MutateCall(p, pos, rng);
    }
  }
  if (store != nullptr) {
    auto refined = Refine(p, *store, m_, rng, this);
    if (!refined.ok()) return refined.status();
    p = *std::move(refined);
  }
  p = MinimizeAfterMutation(p);
  for (size_t pos = 0; pos < p.size(); ++pos) {
    if (p[pos].is_call() && p[pos].call().role == CallRole::kRelative) c.inserted_calls.push_back(pos);
  }
  if (auto diags = ValidateProgram(p, m_); !diags.empty()) {
    return absl::InternalError(
        absl::StrCat("mutation produced an invalid program:\n", FormatDiagnostics(diags)));
  }
  c.program = std::move(p);
  return c;
}

Program MinimizeAfterMutation(const Program& p) {
  std::vector<bool> live(p.size(), false);
  for (size_t pos = p.size(); pos-- > 0;) {
    const Statement& s = p[pos];
    if (s.is_call() || s.is_update()) live[pos] = true;
    if (!live[pos]) continue;
    for (StmtIndex r : ReferencesOf(s)) {
      if (auto rp = p.PositionOf(r)) live[*rp] = true;
    }
  }
  std::vector<size_t> drop;
  for (size_t pos = 0; pos < p.size(); ++pos) {
    if (live[pos]) continue;
    if (p[pos].is_assert()) {
      auto refs = ReferencesOf(p[pos]);
      bool keep = std::all_of(refs.begin(), refs.end(), [&](StmtIndex r) {
        auto rp = p.PositionOf(r);
        return rp && live[*rp];
      });
      if (keep) continue;
    }
    drop.push_back(pos);
  }
  Program out = p;
  if (drop.empty()) {
    out.Normalize();
    return out;
  }
  out.ErasePositions(drop);
  return out;
}

namespace {

class SeedReducer {
 public:
  SeedReducer(const std::vector<uint32_t>& baseline, Executor& exec, uint64_t* execs,
              uint64_t max_execs)
      : baseline_(baseline), exec_(exec), execs_(execs), max_execs_(max_execs) {}

  bool Budget() const { return spent_ < max_execs_; }

  bool Keeps(const Program& q) {
    if (!Budget()) return false;
    ++spent_;
    if (execs_ != nullptr) ++*execs_;
    auto r = exec_.Execute(q);
    return !r.IsCrash() && r.CoverageKeys() == baseline_;
  }

 private:
  const std::vector<uint32_t>& baseline_;
  Executor& exec_;
  uint64_t* execs_;
  uint64_t max_execs_;
  uint64_t spent_ = 0;
};

Program Shrunk(const Program& p, size_t pos, const TypeRegistry& reg) {
  Program q = p;
  Value& v = q[pos].load().value;
  if (auto* bs = std::get_if<ByteSeq>(&v.payload)) {
    uint64_t elem = reg.SizeOf(reg.Resolved(v.type).array().element);
    uint64_t n = bs->bytes.size() / elem;
    bool nul = !bs->bytes.empty() && bs->bytes.back() == 0 && elem == 1;
    bs->bytes.resize(n / 2 * elem);
    if (nul && !bs->bytes.empty()) bs->bytes.back() = 0;
  } else if (auto* el = std::get_if<ElementList>(&v.payload)) {
    el->items.resize(el->items.size() / 2);
  }
  return q;
}

}  // namespace

Program MinimizeNewSeed(const Program& p, const std::vector<uint32_t>& baseline, Executor& exec,
                        uint64_t* execs, uint64_t max_execs) {
  const TypeRegistry& reg = exec.manifest().types();
  SeedReducer reducer(baseline, exec, execs, max_execs);
  Program cur = MinimizeAfterMutation(p);
  bool changed = true;
  while (changed && reducer.Budget()) {
    changed = false;
    for (size_t pos = cur.size(); pos-- > 0 && reducer.Budget();) {
      if (pos >= cur.size()) continue;
      auto target = cur.TargetPosition();
      if (target && pos == *target) continue;
      auto deps = DependentsOf(cur, pos);
      if (target && std::find(deps.begin(), deps.end(), *target) != deps.end()) continue;
      Program q = cur;
      q.ErasePositions(deps);
      q = MinimizeAfterMutation(q);
      if (reducer.Keeps(q)) {
        cur = std::move(q);
        changed = true;
      }
    }
    for (size_t pos = 0; pos < cur.size() && reducer.Budget(); ++pos) {
      if (!cur[pos].is_load()) continue;
      const Value& v = cur[pos].load().value;
      if (reg.IsPointer(v.type) && v.is_ref()) {
        Program q = cur;
        q[pos].load().value.payload = NullValue{};
        q = MinimizeAfterMutation(q);
        if (reducer.Keeps(q)) {
          cur = std::move(q);
          changed = true;
          continue;
        }
      }
      const TypeDesc& d = reg.Resolved(v.type);
      if (d.kind() != TypeKind::kArray || d.array().fixed_len) continue;
      while (ArrayLength(reg, cur[pos].load().value) > 1 && reducer.Budget()) {
        Program q = Shrunk(cur, pos, reg);
        if (!reducer.Keeps(q)) break;
        cur = std::move(q);
        changed = true;
      }
    }
  }
  return cur;
}

}  // namespace apifuzz
