#include "procure/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace procure {

using nlohmann::json;

namespace {

constexpr double kWeightTolerance = 1e-9;
// Guards the ceiling against representation noise such as 0.1 * 30.
constexpr double kCeilSlack = 1e-9;

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError(msg); }

}  // namespace

std::size_t EffectFunction::arity() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

double eval_effect(const EffectFunction& fn, std::span<const double> chosen_effects) {
  if (chosen_effects.size() != fn.arity()) {
    throw StructuralError("effect function covers " + std::to_string(fn.arity()) +
                          " items but received " + std::to_string(chosen_effects.size()) +
                          " effects");
  }
  double value = 1.0;
  for (const auto& group : fn.groups) {
    double sum = 0.0;
    for (const auto& wi : group) sum += wi.weight * chosen_effects[static_cast<std::size_t>(wi.item)];
    value *= sum;
  }
  return value;
}

std::size_t TreatmentProfile::mandatory_count() const {
  std::size_t n = 0;
  while (n < items.size() && items[n].mandatory) ++n;
  return n;
}

std::span<const TreatmentItem> TreatmentProfile::mandatory_items() const {
  return std::span<const TreatmentItem>(items).first(mandatory_count());
}

std::span<const TreatmentItem> TreatmentProfile::alternative_items() const {
  return std::span<const TreatmentItem>(items).subspan(mandatory_count());
}

const TreatmentProfile& ProcurementInstance::profile(std::size_t p) const {
  if (p == 0) return epidemic;
  return diseases.at(p - 1);
}

Count ProcurementInstance::expected_profile_cases(std::size_t p) const {
  if (p == 0) return epidemic.suspected_cases;
  return diseases.at(p - 1).expected_cases;
}

Count suspected_cases(const ProcurementInstance& instance) {
  double total = 0.0;
  for (const auto& d : instance.diseases) total += d.suspect_rate() * static_cast<double>(d.upper_cases);
  if (total <= 0.0) return 0;
  return static_cast<Count>(std::ceil(total - kCeilSlack));
}

Count compute_suspected_cases(ProcurementInstance& instance) {
  instance.epidemic.suspected_cases = suspected_cases(instance);
  return instance.epidemic.suspected_cases;
}

void canonicalize(ProcurementInstance& instance) {
  auto price_of = [&](int id) -> Money {
    if (id < 1 || static_cast<std::size_t>(id) > instance.supplies.size()) return 0;
    return instance.supplies[static_cast<std::size_t>(id - 1)].price_cents;
  };
  auto sort_profile = [&](TreatmentProfile& profile) {
    for (auto& item : profile.items) {
      if (item.mandatory) continue;
      std::stable_sort(item.alternatives.begin(), item.alternatives.end(),
                       [&](const Alternative& a, const Alternative& b) {
                         if (a.effect != b.effect) return a.effect > b.effect;
                         const Money pa = price_of(a.supply), pb = price_of(b.supply);
                         if (pa != pb) return pa < pb;
                         return a.supply < b.supply;
                       });
    }
  };
  sort_profile(instance.epidemic);
  for (auto& d : instance.diseases) sort_profile(d);
}

namespace {

void validate_profile(const ProcurementInstance& instance, const TreatmentProfile& profile,
                      const std::string& where) {
  const std::size_t mandatory = profile.mandatory_count();
  for (std::size_t j = 0; j < profile.items.size(); ++j) {
    const auto& item = profile.items[j];
    const std::string at = where + ".items[" + std::to_string(j) + "]";
    if (item.mandatory && j >= mandatory) invalid(at + ": mandatory items must precede alternative items");
    if (item.alternatives.empty()) invalid(at + ": item has no alternatives");
    if (item.mandatory && item.alternatives.size() != 1) invalid(at + ": mandatory item must have exactly one alternative");
    std::set<int> seen;
    for (std::size_t k = 0; k < item.alternatives.size(); ++k) {
      const auto& alt = item.alternatives[k];
      const std::string alt_at = at + ".alternatives[" + std::to_string(k) + "]";
      if (alt.supply < 1 || static_cast<std::size_t>(alt.supply) > instance.supplies.size()) {
        invalid(alt_at + ": unknown supply id " + std::to_string(alt.supply));
      }
      if (!seen.insert(alt.supply).second) invalid(alt_at + ": supply listed twice in one item");
      if (alt.qty < 1) invalid(alt_at + ": quantity per case must be a positive integer");
      if (!(alt.effect >= 0.0 && alt.effect <= 1.0)) invalid(alt_at + ": effect outside [0, 1]");
      if (item.mandatory && alt.effect != 1.0) invalid(alt_at + ": mandatory item must carry effect 1");
      if (!item.mandatory && k > 0) {
        const auto& prev = item.alternatives[k - 1];
        const Money pp = instance.supply(prev.supply).price_cents;
        const Money pc = instance.supply(alt.supply).price_cents;
        const bool ordered = prev.effect > alt.effect ||
                             (prev.effect == alt.effect &&
                              (pp < pc || (pp == pc && prev.supply < alt.supply)));
        if (!ordered) invalid(alt_at + ": alternatives not sorted by (-effect, price, id)");
      }
    }
  }

  const std::size_t n_alt = profile.items.size() - mandatory;
  std::vector<int> covered(n_alt, 0);
  for (std::size_t g = 0; g < profile.effect_fn.groups.size(); ++g) {
    const auto& group = profile.effect_fn.groups[g];
    const std::string at = where + ".effect_groups[" + std::to_string(g) + "]";
    if (group.empty()) invalid(at + ": empty group");
    double sum = 0.0;
    for (const auto& wi : group) {
      if (wi.item < 0 || static_cast<std::size_t>(wi.item) >= n_alt) {
        invalid(at + ": item " + std::to_string(wi.item) + " is not an alternative item");
      }
      if (!(wi.weight > 0.0)) invalid(at + ": weights must be positive");
      ++covered[static_cast<std::size_t>(wi.item)];
      sum += wi.weight;
    }
    if (std::abs(sum - 1.0) > kWeightTolerance) {
      std::ostringstream os;
      os << at << ": weights sum to " << sum << ", expected 1";
      invalid(os.str());
    }
  }
  for (std::size_t j = 0; j < n_alt; ++j) {
    if (covered[j] != 1) {
      invalid(where + ".effect_groups: alternative item " + std::to_string(j) + " appears " +
              std::to_string(covered[j]) + " times, expected once");
    }
  }
}

}  // namespace

void validate(const ProcurementInstance& instance) {
  for (std::size_t k = 0; k < instance.supplies.size(); ++k) {
    const auto& s = instance.supplies[k];
    const std::string at = "supplies[" + std::to_string(k) + "]";
    if (s.id != static_cast<int>(k) + 1) invalid(at + ": ids must be contiguous 1..n, found " + std::to_string(s.id));
    if (s.price_cents < 0) invalid(at + ": negative price");
    if (s.inventory < 0) invalid(at + ": negative inventory");
    if (!(s.volume >= 0.0)) invalid(at + ": negative volume");
  }
  if (instance.budget_cents < 0) invalid("budget_cents: negative budget");
  if (instance.cycle_days < 1) invalid("cycle_days: must be positive");
  if (!(instance.local_incidence >= 0.0 && instance.local_incidence <= 1.0)) invalid("local_incidence: outside [0, 1]");

  validate_profile(instance, instance.epidemic, "epidemic");
  for (std::size_t i = 0; i < instance.diseases.size(); ++i) {
    const auto& d = instance.diseases[i];
    const std::string at = "diseases[" + std::to_string(i) + "]";
    if (d.id != static_cast<int>(i) + 1) invalid(at + ": ids must be contiguous 1..m, found " + std::to_string(d.id));
    if (!(d.weight >= 0.0)) invalid(at + ": negative weight");
    if (d.lower_cases < 0 || d.lower_cases > d.expected_cases || d.expected_cases > d.upper_cases) {
      invalid(at + ": case counts must satisfy 0 <= lower <= expected <= upper");
    }
    if (!(d.suspect_prob >= 0.0 && d.suspect_prob <= 1.0)) invalid(at + ": suspect_prob outside [0, 1]");
    if (!(d.companion_suspect_prob >= 0.0 && d.companion_suspect_prob <= 1.0)) {
      invalid(at + ": companion_suspect_prob outside [0, 1]");
    }
    if (!(d.companions >= 0.0)) invalid(at + ": negative companions");
    validate_profile(instance, d, at);
  }
}

SupplySplit supply_split(const ProcurementInstance& instance) {
  std::vector<char> epidemic(instance.supplies.size() + 1, 0), common(instance.supplies.size() + 1, 0);
  for (const auto& item : instance.epidemic.items)
    for (const auto& a : item.alternatives) epidemic[static_cast<std::size_t>(a.supply)] = 1;
  for (const auto& d : instance.diseases)
    for (const auto& item : d.items)
      for (const auto& a : item.alternatives) common[static_cast<std::size_t>(a.supply)] = 1;
  SupplySplit split;
  for (std::size_t k = 1; k <= instance.supplies.size(); ++k) {
    if (epidemic[k] && !common[k]) ++split.epidemic;
    else ++split.common;
  }
  return split;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError((path_.empty() ? std::string("/") : path_) + ": " + msg);
  }

  const json& object(const json& j, std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail("expected an object");
    for (const auto& [key, _] : j.items()) {
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
        fail("unknown key \"" + key + "\"");
      }
    }
    for (const char* key : allowed) {
      if (!j.contains(key)) fail("missing key \"" + std::string(key) + "\"");
    }
    return j;
  }

  Reader at(const std::string& key) const { return Reader(path_ + "/" + key); }
  Reader at(std::size_t index) const { return Reader(path_ + "/" + std::to_string(index)); }

  std::int64_t integer(const json& j) const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<std::int64_t>();
  }
  double number(const json& j) const {
    if (!j.is_number()) fail("expected a number");
    return j.get<double>();
  }
  bool boolean(const json& j) const {
    if (!j.is_boolean()) fail("expected a boolean");
    return j.get<bool>();
  }
  std::string string(const json& j) const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  const json& array(const json& j) const {
    if (!j.is_array()) fail("expected an array");
    return j;
  }

 private:
  std::string path_;
};

void read_profile(const json& j, const Reader& r, TreatmentProfile& profile) {
  const auto& items = r.at("items").array(j.at("items"));
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Reader ri = r.at("items").at(i);
    const auto& jo = ri.object(items[i], {"mandatory", "alternatives"});
    TreatmentItem item;
    item.mandatory = ri.at("mandatory").boolean(jo.at("mandatory"));
    const auto& alts = ri.at("alternatives").array(jo.at("alternatives"));
    for (std::size_t k = 0; k < alts.size(); ++k) {
      const Reader rk = ri.at("alternatives").at(k);
      const auto& ja = rk.object(alts[k], {"supply", "qty", "effect"});
      Alternative alt;
      alt.supply = static_cast<int>(rk.at("supply").integer(ja.at("supply")));
      alt.qty = rk.at("qty").integer(ja.at("qty"));
      alt.effect = rk.at("effect").number(ja.at("effect"));
      item.alternatives.push_back(alt);
    }
    profile.items.push_back(std::move(item));
  }
  const auto& groups = r.at("effect_groups").array(j.at("effect_groups"));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Reader rg = r.at("effect_groups").at(g);
    std::vector<WeightedItem> group;
    const auto& jg = rg.array(groups[g]);
    for (std::size_t e = 0; e < jg.size(); ++e) {
      const Reader re = rg.at(e);
      const auto& jw = re.object(jg[e], {"item", "weight"});
      group.push_back({static_cast<int>(re.at("item").integer(jw.at("item"))), re.at("weight").number(jw.at("weight"))});
    }
    profile.effect_fn.groups.push_back(std::move(group));
  }
}

json write_profile(const TreatmentProfile& profile) {
  json items = json::array();
  for (const auto& item : profile.items) {
    json alts = json::array();
    for (const auto& a : item.alternatives) alts.push_back({{"supply", a.supply}, {"qty", a.qty}, {"effect", a.effect}});
    items.push_back({{"mandatory", item.mandatory}, {"alternatives", std::move(alts)}});
  }
  json groups = json::array();
  for (const auto& g : profile.effect_fn.groups) {
    json jg = json::array();
    for (const auto& wi : g) jg.push_back({{"item", wi.item}, {"weight", wi.weight}});
    groups.push_back(std::move(jg));
  }
  return {{"items", std::move(items)}, {"effect_groups", std::move(groups)}};
}

}  // namespace

ProcurementInstance instance_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  const Reader r("");
  r.object(root, {"supplies", "epidemic", "diseases", "budget_cents", "cycle_days", "local_incidence"});

  ProcurementInstance inst;
  const auto& supplies = r.at("supplies").array(root.at("supplies"));
  for (std::size_t k = 0; k < supplies.size(); ++k) {
    const Reader rk = r.at("supplies").at(k);
    const auto& js = rk.object(supplies[k], {"id", "name", "price_cents", "volume", "inventory"});
    Supply s;
    s.id = static_cast<int>(rk.at("id").integer(js.at("id")));
    s.name = rk.at("name").string(js.at("name"));
    s.price_cents = rk.at("price_cents").integer(js.at("price_cents"));
    s.volume = rk.at("volume").number(js.at("volume"));
    s.inventory = rk.at("inventory").integer(js.at("inventory"));
    inst.supplies.push_back(std::move(s));
  }

  const Reader re = r.at("epidemic");
  re.object(root.at("epidemic"), {"items", "effect_groups"});
  read_profile(root.at("epidemic"), re, inst.epidemic);

  const auto& diseases = r.at("diseases").array(root.at("diseases"));
  for (std::size_t i = 0; i < diseases.size(); ++i) {
    const Reader rd = r.at("diseases").at(i);
    const auto& jd = rd.object(diseases[i], {"id", "name", "weight", "expected_cases", "lower_cases", "upper_cases",
                                             "suspect_prob", "companions", "companion_suspect_prob", "emergency",
                                             "items", "effect_groups"});
    DiseaseProfile d;
    d.id = static_cast<int>(rd.at("id").integer(jd.at("id")));
    d.name = rd.at("name").string(jd.at("name"));
    d.weight = rd.at("weight").number(jd.at("weight"));
    d.expected_cases = rd.at("expected_cases").integer(jd.at("expected_cases"));
    d.lower_cases = rd.at("lower_cases").integer(jd.at("lower_cases"));
    d.upper_cases = rd.at("upper_cases").integer(jd.at("upper_cases"));
    d.suspect_prob = rd.at("suspect_prob").number(jd.at("suspect_prob"));
    d.companions = rd.at("companions").number(jd.at("companions"));
    d.companion_suspect_prob = rd.at("companion_suspect_prob").number(jd.at("companion_suspect_prob"));
    d.emergency = rd.at("emergency").boolean(jd.at("emergency"));
    read_profile(jd, rd, d);
    inst.diseases.push_back(std::move(d));
  }

  inst.budget_cents = r.at("budget_cents").integer(root.at("budget_cents"));
  inst.cycle_days = static_cast<int>(r.at("cycle_days").integer(root.at("cycle_days")));
  inst.local_incidence = r.at("local_incidence").number(root.at("local_incidence"));

  canonicalize(inst);
  validate(inst);
  compute_suspected_cases(inst);
  return inst;
}

std::string instance_to_json(const ProcurementInstance& instance) {
  json supplies = json::array();
  for (const auto& s : instance.supplies) {
    supplies.push_back({{"id", s.id}, {"name", s.name}, {"price_cents", s.price_cents},
                        {"volume", s.volume}, {"inventory", s.inventory}});
  }
  json diseases = json::array();
  for (const auto& d : instance.diseases) {
    json jd = write_profile(d);
    jd["id"] = d.id;
    jd["name"] = d.name;
    jd["weight"] = d.weight;
    jd["expected_cases"] = d.expected_cases;
    jd["lower_cases"] = d.lower_cases;
    jd["upper_cases"] = d.upper_cases;
    jd["suspect_prob"] = d.suspect_prob;
    jd["companions"] = d.companions;
    jd["companion_suspect_prob"] = d.companion_suspect_prob;
    jd["emergency"] = d.emergency;
    diseases.push_back(std::move(jd));
  }
  json root = {{"supplies", std::move(supplies)},
               {"epidemic", write_profile(instance.epidemic)},
               {"diseases", std::move(diseases)},
               {"budget_cents", instance.budget_cents},
               {"cycle_days", instance.cycle_days},
               {"local_incidence", instance.local_incidence}};
  return root.dump(1);
}

ProcurementInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void save_instance(const ProcurementInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write instance file " + path.string());
  out << instance_to_json(instance) << '\n';
}

}  // namespace procure
