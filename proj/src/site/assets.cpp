#include "ald/site/builder.hpp"

namespace ald::site {

namespace {

constexpr const char* css = R"(body {
  font-family: system-ui, sans-serif;
  line-height: 1.5;
  margin: 0;
  color: #1d1d1f;
}
main {
  max-width: 52rem;
  margin: 2rem auto;
  padding: 0 1rem;
}
pre {
  padding: 0.75rem 1rem;
  overflow-x: auto;
  border-radius: 4px;
}
.ald-code {
  background: #f5f5f7;
  border: 1px solid #d2d2d7;
}
.ald-exercise .ald-code {
  border-left: 4px solid #0071e3;
}
.ald-query .ald-code {
  border-left: 4px solid #34c759;
}
.ald-filter-output {
  background: #fff4e5;
  border: 1px solid #f5a623;
}
.ald-banner {
  background: #ffe5e5;
  border: 1px solid #d70015;
  padding: 0.5rem 1rem;
}
)";

// Loader stub: validates the manifest and marks cells ready.
constexpr const char* runtime_js = R"((function () {
  "use strict";
  var PROTOCOL_VERSION = 1;

  function banner(text) {
    var div = document.createElement("div");
    div.className = "ald-banner";
    div.textContent = text;
    document.body.insertBefore(div, document.body.firstChild);
  }

  function start() {
    var node = document.getElementById("ald-manifest");
    var manifest = null;
    try {
      manifest = node ? JSON.parse(node.textContent) : null;
    } catch (e) {
      manifest = null;
    }
    if (!manifest || manifest.protocol_version !== PROTOCOL_VERSION || !Array.isArray(manifest.cells)) {
      banner("Interactive cells are unavailable: the page manifest is missing or invalid.");
      return;
    }
    manifest.cells.forEach(function (cell) {
      var el = document.querySelector('[data-cell-id="' + cell.cell_id + '"]');
      if (el) el.setAttribute("data-ald-ready", "true");
    });
    window.ald = { manifest: manifest };
  }

  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", start);
  } else {
    start();
  }
})();
)";

} // namespace

const std::vector<std::pair<std::string, std::string>>& asset_files()
{
    static const std::vector<std::pair<std::string, std::string>> files = {
        {"ald.css", css},
        {"ald-runtime.js", runtime_js},
    };
    return files;
}

} // namespace ald::site
