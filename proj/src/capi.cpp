#include "mostvision.h"

#include <cstring>
#include <string>

#include "mostv/errors.hpp"
#include "mostv/pipeline.hpp"

struct mv_context {
  mostv::Pipeline pipeline;
  std::string last_error;

  explicit mv_context(mostv::ExperimentConfig config)
      : pipeline(std::move(config)) {}
};

namespace {

mv_status status_for(const mostv::Error& e) {
  switch (e.code()) {
    case mostv::ErrorCode::Config: return MV_CONFIG_ERROR;
    case mostv::ErrorCode::StageDependency: return MV_STAGE_DEPENDENCY_ERROR;
    case mostv::ErrorCode::Numeric: return MV_NUMERIC_ERROR;
    case mostv::ErrorCode::Other: return MV_ERROR;
  }
  return MV_ERROR;
}

template <class Fn>
mv_status guarded(mv_context* ctx, Fn&& fn) {
  if (!ctx) return MV_ERROR;
  try {
    fn();
    ctx->last_error.clear();
    return MV_OK;
  } catch (const mostv::Error& e) {
    ctx->last_error = e.what();
    return status_for(e);
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    return MV_ERROR;
  } catch (...) {
    ctx->last_error = "unknown failure";
    return MV_ERROR;
  }
}

}  // namespace

extern "C" {

mv_status mv_context_create(const char* config_json, mv_context** out_ctx) {
  if (!out_ctx) return MV_ERROR;
  *out_ctx = nullptr;
  try {
    mostv::ExperimentConfig config =
        (config_json && *config_json)
            ? mostv::ExperimentConfig::from_json_text(config_json)
            : mostv::ExperimentConfig();
    *out_ctx = new mv_context(std::move(config));
    return MV_OK;
  } catch (const mostv::Error& e) {
    return status_for(e);
  } catch (...) {
    return MV_ERROR;
  }
}

void mv_context_destroy(mv_context* ctx) { delete ctx; }

const char* mv_last_error(const mv_context* ctx) {
  return ctx ? ctx->last_error.c_str() : "";
}

mv_status mv_generate(mv_context* ctx) {
  return guarded(ctx, [&] { ctx->pipeline.generate(); });
}

mv_status mv_train(mv_context* ctx, const char* model_selector) {
  return guarded(ctx, [&] {
    ctx->pipeline.train(model_selector ? model_selector : "");
  });
}

mv_status mv_eval(mv_context* ctx, const char* model_selector) {
  return guarded(ctx, [&] {
    ctx->pipeline.eval(model_selector ? model_selector : "");
  });
}

mv_status mv_analyze(mv_context* ctx) {
  return guarded(ctx, [&] { ctx->pipeline.analyze(); });
}

mv_status mv_plot(mv_context* ctx) {
  return guarded(ctx, [&] { ctx->pipeline.plot(); });
}

mv_status mv_run_all(mv_context* ctx) {
  return guarded(ctx, [&] { ctx->pipeline.all(); });
}

mv_status mv_dataset_hash(mv_context* ctx, char* buf, size_t buf_size) {
  return guarded(ctx, [&] {
    const std::string hash = ctx->pipeline.dataset_hash();
    if (!buf || buf_size <= hash.size())
      throw mostv::ConfigError("hash buffer too small");
    std::memcpy(buf, hash.c_str(), hash.size() + 1);
  });
}

size_t mv_default_config(char* buf, size_t buf_size) {
  const std::string text = mostv::ExperimentConfig().to_json();
  if (buf && buf_size > 0) {
    const size_t n = std::min(buf_size - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
  return text.size();
}

const char* mv_version(void) { return mostv::kToolVersion; }

}  // extern "C"
