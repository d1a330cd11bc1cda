#include "warpsim/corpus.hpp"

#include <functional>
#include <map>
#include <optional>

#include "json.hpp"

namespace warpsim {

using nlohmann::json;

namespace {

// Affine expression helpers for building programs.
json ex(std::initializer_list<std::pair<const char*, Value>> terms, Value c = 0) {
  json j = json::object();
  for (const auto& [n, v] : terms) j[n] = v;
  if (c != 0 || terms.size() == 0) j["_const"] = c;
  return j;
}

json ge(json e) { return {{"expr", std::move(e)}, {"rel", ">=0"}}; }
json eq(json e) { return {{"expr", std::move(e)}, {"rel", "=0"}}; }

// lo <= it < hi (hi exclusive)
json range(const char* it, Value lo, Value hi) { return json::array({ge(ex({{it, 1}}, -lo)), ge(ex({{it, -1}}, hi - 1))}); }

json range_expr(const char* it, json lo_extra, Value hi) {
  // it - lo_extra >= 0 and it <= hi - 1
  return json::array({ge(std::move(lo_extra)), ge(ex({{it, -1}}, hi - 1))});
}

json loop(const char* it, json bounds, json body, Value stride = 1) {
  return {{"type", "loop"}, {"iter", it}, {"stride", stride}, {"bounds", std::move(bounds)}, {"body", std::move(body)}};
}

json acc(const char* kind, const char* array, json idx, json guard = nullptr) {
  json j = {{"type", "access"}, {"kind", kind}, {"array", array}, {"idx", std::move(idx)}};
  if (!guard.is_null()) j["guard"] = std::move(guard);
  return j;
}

json arr(const char* name, Value elem, std::vector<Value> dims, std::optional<Value> base = std::nullopt) {
  json j = {{"name", name}, {"elem_size", elem}, {"dims", dims}};
  if (base) j["base"] = *base;
  return j;
}

std::string program(json arrays, json root) { return json{{"arrays", std::move(arrays)}, {"root", std::move(root)}}.dump(2); }

Value align_up(Value v, Value a) { return ceil_div(v, a) * a; }

std::string trimatvec(Value n) {
  json body_j = json::array({
      acc("read", "c", json::array({ex({{"i", 1}})})),
      acc("read", "A", json::array({ex({{"i", 1}}), ex({{"j", 1}})})),
      acc("read", "x", json::array({ex({{"j", 1}})})),
      acc("write", "c", json::array({ex({{"i", 1}})})),
  });
  json inner = loop("j", range_expr("j", ex({{"j", 1}, {"i", -1}}), n), body_j);
  json outer = loop("i", range("i", 0, n), json::array({acc("write", "c", json::array({ex({{"i", 1}})})), inner}));
  return program(json::array({arr("c", 8, {n}), arr("A", 8, {n, n}), arr("x", 8, {n})}), outer);
}

std::string jacobi2d(Value n, Value steps) {
  auto idx = [](Value di, Value dj) { return json::array({ex({{"i", 1}}, di), ex({{"j", 1}}, dj)}); };
  json sweep = json::array({acc("read", "A", idx(0, 0)), acc("read", "A", idx(0, -1)), acc("read", "A", idx(0, 1)),
                            acc("read", "A", idx(1, 0)), acc("read", "A", idx(-1, 0)), acc("write", "B", idx(0, 0))});
  json copy = json::array({acc("read", "B", idx(0, 0)), acc("write", "A", idx(0, 0))});
  json nest1 = loop("i", range("i", 1, n - 1), json::array({loop("j", range("j", 1, n - 1), sweep)}));
  json nest2 = loop("i", range("i", 1, n - 1), json::array({loop("j", range("j", 1, n - 1), copy)}));
  json root = loop("t", range("t", 0, steps), json::array({nest1, nest2}));
  return program(json::array({arr("A", 8, {n, n}), arr("B", 8, {n, n})}), root);
}

std::string matmul(Value n) {
  auto ij = json::array({ex({{"i", 1}}), ex({{"j", 1}})});
  json body = json::array({acc("read", "C", ij), acc("read", "A", json::array({ex({{"i", 1}}), ex({{"k", 1}})})),
                           acc("read", "B", json::array({ex({{"k", 1}}), ex({{"j", 1}})})), acc("write", "C", ij)});
  json root = loop("i", range("i", 0, n),
                   json::array({loop("j", range("j", 0, n), json::array({loop("k", range("k", 0, n), body)}))}));
  return program(json::array({arr("A", 8, {n, n}), arr("B", 8, {n, n}), arr("C", 8, {n, n})}), root);
}

std::string seidel2d(Value n, Value steps) {
  json body = json::array();
  for (Value di = -1; di <= 1; ++di)
    for (Value dj = -1; dj <= 1; ++dj)
      body.push_back(acc("read", "A", json::array({ex({{"i", 1}}, di), ex({{"j", 1}}, dj)})));
  body.push_back(acc("write", "A", json::array({ex({{"i", 1}}), ex({{"j", 1}})})));
  json root = loop("t", range("t", 0, steps),
                   json::array({loop("i", range("i", 1, n - 1), json::array({loop("j", range("j", 1, n - 1), body)}))}));
  return program(json::array({arr("A", 8, {n, n})}), root);
}

// Stencil whose write stops halfway and which reads a third array on even
// iterations only.
std::string guarded_stencil(Value n) {
  Value page = 65536;
  Value b_base = align_up(n * 64, page);
  Value c_base = align_up(b_base + n * 64, page);
  json even = json::array({eq(json{{"i", 1}, {"_floor", json::array({{{"num", ex({{"i", 1}})}, {"den", 2}, {"coeff", -2}}})}})});
  json body = json::array({acc("read", "A", json::array({ex({{"i", 1}}, -1)})), acc("read", "A", json::array({ex({{"i", 1}})})),
                           acc("write", "B", json::array({ex({{"i", 1}}, -1)}), json::array({ge(ex({{"i", -1}}, n / 2 - 1))})),
                           acc("read", "C", json::array({ex({{"i", 1}})}), even)});
  json root = loop("i", range("i", 1, n), body);
  return program(json::array({arr("A", 64, {n}, 0), arr("B", 64, {n}, b_base), arr("C", 64, {n}, c_base)}), root);
}

std::string aliasing_stride(Value n) {
  json body = json::array({acc("read", "A", json::array({ex({{"i", 1}})})), acc("read", "A", json::array({ex({{"i", 2}})})),
                           acc("write", "B", json::array({ex({{"i", 1}})}))});
  json root = loop("i", range("i", 0, n), body);
  return program(json::array({arr("A", 8, {2 * n}), arr("B", 8, {n})}), root);
}

struct Kernel {
  std::function<std::string()> small, medium;
};

const std::map<std::string, Kernel>& kernels() {
  static const std::map<std::string, Kernel> k = {
      {"stencil1d", {[] { return stencil1d_program(999); }, [] { return stencil1d_program(9999); }}},
      {"trimatvec", {[] { return trimatvec(100); }, [] { return trimatvec(300); }}},
      {"jacobi2d-mini", {[] { return jacobi2d(16, 2); }, [] { return jacobi2d(40, 3); }}},
      {"matmul-mini", {[] { return matmul(12); }, [] { return matmul(32); }}},
      {"seidel2d-mini", {[] { return seidel2d(16, 2); }, [] { return seidel2d(40, 3); }}},
      {"guarded-stencil", {[] { return guarded_stencil(999); }, [] { return guarded_stencil(9999); }}},
      {"aliasing-stride", {[] { return aliasing_stride(500); }, [] { return aliasing_stride(5000); }}},
  };
  return k;
}

}  // namespace

std::string stencil1d_program(Value n, Value elem_size) {
  Value b_base = align_up(n * elem_size, 65536);
  json body = json::array({acc("read", "A", json::array({ex({{"i", 1}}, -1)})), acc("read", "A", json::array({ex({{"i", 1}})})),
                           acc("write", "B", json::array({ex({{"i", 1}}, -1)}))});
  return program(json::array({arr("A", elem_size, {n}, 0), arr("B", elem_size, {n}, b_base)}),
                 loop("i", range("i", 1, n), body));
}

std::vector<std::string> corpus_list() {
  std::vector<std::string> out;
  for (const auto& [name, k] : kernels()) out.push_back(name);
  return out;
}

std::vector<std::string> corpus_sizes() { return {"small", "medium"}; }

std::string corpus_get(const std::string& name, const std::string& size) {
  auto it = kernels().find(name);
  if (it == kernels().end()) throw UnknownKernel("unknown kernel '" + name + "'");
  if (size == "small") return it->second.small();
  if (size == "medium") return it->second.medium();
  throw UnknownKernel("unknown size '" + size + "' for kernel '" + name + "'");
}

}  // namespace warpsim
