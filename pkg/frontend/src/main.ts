import { ApiClient } from "./api.js";
import { initialState, selectMeter, setGranularity, setView, ViewState } from "./state.js";
import { renderConsumption } from "./views/consumption.js";
import { renderForecast } from "./views/forecast.js";
import { renderPatterns } from "./views/patterns.js";
import { renderSegments } from "./views/segments.js";
import { AnomalyView } from "./views/anomalies.js";

const VIEWS = ["consumption", "patterns", "segments", "forecast", "anomalies"] as const;

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const role = params.get("role") === "customer" ? "customer" : "utility";
  const ownMeter = params.get("meter") ?? undefined;
  let state: ViewState = initialState(role, ownMeter);

  const api = new ApiClient({ role, meterId: ownMeter });
  const anomalyView = new AnomalyView(api);

  const meterSelect = document.querySelector<HTMLSelectElement>("#meter-select")!;
  const granularitySelect = document.querySelector<HTMLSelectElement>("#granularity-select")!;
  const nav = document.querySelector<HTMLElement>("#nav")!;
  const content = document.querySelector<HTMLElement>("#content")!;

  if (role === "utility") {
    const { meters } = await api.meters();
    meterSelect.innerHTML = meters
      .map((m) => `<option value="${m}">${m}</option>`)
      .join("");
    if (meters.length) state = selectMeter(state, meters[0]);
  } else {
    meterSelect.innerHTML = `<option value="${ownMeter}">${ownMeter}</option>`;
    meterSelect.disabled = true;
  }

  nav.innerHTML = VIEWS.filter((v) => role === "utility" || v !== "segments")
    .map((v) => `<button data-view="${v}">${v}</button>`)
    .join("");

  async function render(): Promise<void> {
    anomalyView.unmount();
    content.innerHTML = "<p>loading…</p>";
    try {
      switch (state.view) {
        case "consumption":
          await renderConsumption(content, api, state);
          break;
        case "patterns":
          await renderPatterns(content, api, state);
          break;
        case "segments":
          await renderSegments(content, api, state);
          break;
        case "forecast":
          await renderForecast(content, api, state);
          break;
        case "anomalies":
          await anomalyView.mount(content, state);
          break;
      }
    } catch (err) {
      content.innerHTML = `<p class="error">${String(err)}</p>`;
    }
    nav.querySelectorAll("button").forEach((b) => {
      b.classList.toggle("active", b.dataset.view === state.view);
    });
  }

  meterSelect.addEventListener("change", () => {
    state = selectMeter(state, meterSelect.value);
    void render();
  });
  granularitySelect.addEventListener("change", () => {
    state = setGranularity(state, granularitySelect.value as ViewState["granularity"]);
    void render();
  });
  nav.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const view = target.dataset?.view;
    if (view) {
      state = setView(state, view as ViewState["view"]);
      void render();
    }
  });

  await render();
}

void boot();
