#pragma once

#include "memocr/memory_lifecycle.hpp"

#include <string>

namespace memocr {

// Chat-completion style endpoint settings. Empty fields fall back to
// MEMOCR_ENDPOINT, MEMOCR_MODEL and MEMOCR_API_KEY.
struct HttpClientConfig {
    std::string endpoint;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;
    int timeout_seconds = 120;
    int max_tokens = 2048;

    HttpClientConfig with_environment() const;
};

// Sends the drafting prompt as a single text message.
class HttpDrafter final : public DrafterClient {
public:
    explicit HttpDrafter(HttpClientConfig cfg);
    std::string draft(const DraftRequest& request) override;

private:
    HttpClientConfig cfg_;
};

// Sends the fitted memory image (PNG, base64 data URL) followed by the reading prompt.
class HttpReader final : public ReaderClient {
public:
    explicit HttpReader(HttpClientConfig cfg);
    std::string read(const ReadRequest& request) override;

private:
    HttpClientConfig cfg_;
};

}  // namespace memocr
