import { ApiClient, ApiRequestError } from "../api.js";
import { Poller } from "../poller.js";
import { anomalyFeedRows } from "../series.js";
import type { AnomaliesResponse } from "../types.js";
import type { ViewState } from "../state.js";

// Live anomaly feed with threshold tuning: the epsilon posted here changes
// which future days the backend flags; past reports stay as issued.
export class AnomalyView {
  private poller: Poller<AnomaliesResponse> | null = null;

  constructor(private readonly api: ApiClient) {}

  async mount(container: HTMLElement, state: ViewState): Promise<void> {
    this.unmount();
    if (!state.selectedMeter) {
      container.innerHTML = "<p>Select a meter.</p>";
      return;
    }
    const meterId = state.selectedMeter;
    container.innerHTML = `
      <form id="threshold-form">
        <label>detection threshold &epsilon;
          <input name="epsilon" id="threshold-input" type="number" step="any" min="0" max="1">
        </label>
        <button type="submit">apply</button>
        <span id="threshold-status"></span>
      </form>
      <div id="anomaly-feed"></div>`;

    const input = container.querySelector<HTMLInputElement>("#threshold-input")!;
    const status = container.querySelector<HTMLElement>("#threshold-status")!;
    const feed = container.querySelector<HTMLElement>("#anomaly-feed")!;

    const current = await this.api.threshold(meterId);
    input.value = String(current.epsilon);

    container.querySelector<HTMLFormElement>("#threshold-form")!.addEventListener(
      "submit",
      (event) => {
        event.preventDefault();
        void this.applyThreshold(meterId, Number(input.value), status);
      },
    );

    this.poller = new Poller(
      () => this.api.anomalies(meterId),
      (data) => {
        feed.innerHTML = renderFeed(data);
      },
      (err) => {
        feed.innerHTML = `<p class="warning">feed error: ${String(err)}</p>`;
      },
    );
    this.poller.start(state.pollSeconds * 1000);
  }

  private async applyThreshold(
    meterId: string,
    epsilon: number,
    status: HTMLElement,
  ): Promise<void> {
    try {
      const updated = await this.api.setThreshold(meterId, epsilon);
      status.textContent = `saved: ε = ${updated.epsilon}`;
      status.className = "ok";
    } catch (err) {
      // surface the API's 400 inline instead of throwing away the form
      status.textContent =
        err instanceof ApiRequestError ? err.message : "request failed";
      status.className = "error";
    }
  }

  unmount(): void {
    this.poller?.stop();
    this.poller = null;
  }
}

export function renderFeed(data: AnomaliesResponse): string {
  const rows = anomalyFeedRows(data)
    .map(
      (r) =>
        `<tr class="${r.flagged ? "flagged" : ""}">` +
        `<td>${r.day}</td><td>${r.distance.toFixed(4)}</td>` +
        `<td>${r.density === null ? "degenerate" : r.density.toExponential(3)}</td>` +
        `<td>${r.epsilon}</td><td>${r.flagged ? "ANOMALY" : ""}</td></tr>`,
    )
    .join("");
  return (
    `<table><thead><tr><th>day</th><th>distance</th><th>density</th>` +
    `<th>&epsilon;</th><th></th></tr></thead><tbody>${rows}</tbody></table>`
  );
}
