#include "webrank/webrank.h"

#include <cstring>
#include <string>

#include "webrank/error.hpp"
#include "webrank/specfile.hpp"

struct webrank_web {
  webrank::SpecFile spec;
};

namespace {

thread_local std::string last_error;
thread_local int last_first = 0;
thread_local int last_second = 0;

webrank_status status_of(const std::exception& e) {
  using namespace webrank;
  if (auto* p = dynamic_cast<const DegeneratePairError*>(&e)) {
    last_first = p->first();
    last_second = p->second();
    return WEBRANK_E_DEGENERATE_PAIR;
  }
  if (dynamic_cast<const IoError*>(&e)) return WEBRANK_E_IO;
  if (dynamic_cast<const ParseError*>(&e)) return WEBRANK_E_PARSE;
  if (dynamic_cast<const ValidationError*>(&e)) return WEBRANK_E_VALIDATION;
  if (dynamic_cast<const DomainError*>(&e)) return WEBRANK_E_DOMAIN;
  if (dynamic_cast<const InsufficientDomainError*>(&e)) return WEBRANK_E_INSUFFICIENT_DOMAIN;
  if (dynamic_cast<const ResourceError*>(&e)) return WEBRANK_E_RESOURCE;
  if (dynamic_cast<const PreconditionError*>(&e)) return WEBRANK_E_PRECONDITION;
  if (dynamic_cast<const ReductionIncompleteError*>(&e)) return WEBRANK_E_REDUCTION;
  if (dynamic_cast<const VanishingCoefficientError*>(&e)) return WEBRANK_E_VANISHING;
  if (dynamic_cast<const IndeterminateError*>(&e)) return WEBRANK_E_INDETERMINATE;
  return WEBRANK_E_INTERNAL;
}

template <class Fn>
webrank_status guard(Fn&& fn) {
  last_error.clear();
  last_first = last_second = 0;
  try {
    fn();
    return WEBRANK_OK;
  } catch (const std::exception& e) {
    last_error = e.what();
    return status_of(e);
  } catch (...) {
    last_error = "unknown exception";
    return WEBRANK_E_INTERNAL;
  }
}

webrank_status fail(webrank_status s, const char* msg) {
  last_error = msg;
  return s;
}

webrank::SpecOverrides overrides_of(const webrank_options* o, const std::string& text) {
  webrank::SpecOverrides ov;
  if (!o) return ov;
  if (o->has_seed) ov.seed = o->seed;
  if (o->samples) ov.samples = o->samples;
  if (o->tol != 0.0) ov.tol = o->tol;
  if (o->order && *o->order) {
    // The degree is only known after parsing; load once without the order.
    webrank::SpecFile plain = webrank::parse_webspec(text, "", {});
    ov.order = webrank::parse_order(o->order, plain.web.degree());
  }
  return ov;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* webrank_version(void) {
  static const std::string v = webrank::version();
  return v.c_str();
}

const char* webrank_last_error(void) { return last_error.c_str(); }

int webrank_last_pair(int* first, int* second) {
  if (first) *first = last_first;
  if (second) *second = last_second;
  return last_first != 0;
}

const char* webrank_status_name(webrank_status status) {
  switch (status) {
    case WEBRANK_OK: return "ok";
    case WEBRANK_E_ARGUMENT: return "argument";
    case WEBRANK_E_IO: return "io";
    case WEBRANK_E_PARSE: return "parse";
    case WEBRANK_E_VALIDATION: return "validation";
    case WEBRANK_E_DEGENERATE_PAIR: return "degenerate-pair";
    case WEBRANK_E_DOMAIN: return "domain";
    case WEBRANK_E_INSUFFICIENT_DOMAIN: return "insufficient-domain";
    case WEBRANK_E_RESOURCE: return "resource";
    case WEBRANK_E_PRECONDITION: return "precondition";
    case WEBRANK_E_REDUCTION: return "reduction-incomplete";
    case WEBRANK_E_VANISHING: return "vanishing-coefficient";
    case WEBRANK_E_INDETERMINATE: return "indeterminate";
    case WEBRANK_E_INTERNAL: return "internal";
  }
  return "unknown";
}

webrank_status webrank_load_string(const char* text, const char* origin, const webrank_options* options,
                                   webrank_web** out) {
  if (!text || !out) return fail(WEBRANK_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    const std::string body(text);
    auto* w = new webrank_web{webrank::parse_webspec(body, origin ? origin : "", overrides_of(options, body))};
    *out = w;
  });
}

webrank_status webrank_load(const char* path, const webrank_options* options, webrank_web** out) {
  if (!path || !out) return fail(WEBRANK_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    webrank::SpecFile plain = webrank::load_webspec(path);
    webrank::SpecOverrides ov;
    if (options) {
      if (options->has_seed) ov.seed = options->seed;
      if (options->samples) ov.samples = options->samples;
      if (options->tol != 0.0) ov.tol = options->tol;
      if (options->order && *options->order) ov.order = webrank::parse_order(options->order, plain.web.degree());
    }
    *out = new webrank_web{webrank::load_webspec(path, ov)};
  });
}

void webrank_free(webrank_web* web) { delete web; }

int webrank_degree(const webrank_web* web) { return web ? web->spec.web.degree() : 0; }

int webrank_relation_count(const webrank_web* web) {
  return web ? static_cast<int>(web->spec.relations.size()) : 0;
}

webrank_status webrank_run(const webrank_web* web, const char* command, char** report_json, int* exit_code) {
  if (!web || !command || !report_json) return fail(WEBRANK_E_ARGUMENT, "null argument");
  *report_json = nullptr;
  const auto& cmds = webrank::report_commands();
  if (std::find(cmds.begin(), cmds.end(), std::string(command)) == cmds.end()) {
    return fail(WEBRANK_E_ARGUMENT, "unknown command");
  }
  return guard([&] {
    webrank::RunResult r = webrank::run_report(command, web->spec);
    *report_json = dup(r.json);
    if (!*report_json) throw std::bad_alloc();
    if (exit_code) *exit_code = r.exit_code;
  });
}

void webrank_string_free(char* s) { std::free(s); }

}  // extern "C"
