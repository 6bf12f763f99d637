import { ApiClient } from "../api.js";
import { lineChart } from "../charts.js";
import { consumptionSeries } from "../series.js";
import type { ViewState } from "../state.js";

export async function renderConsumption(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
): Promise<void> {
  if (!state.selectedMeter) {
    container.innerHTML = "<p>Select a meter.</p>";
    return;
  }
  const compare = await api.compare(state.selectedMeter, state.granularity, {
    from: state.from,
    to: state.to,
  });
  const series = consumptionSeries(compare);
  container.innerHTML = lineChart(series, `consumption vs neighborhood (${state.granularity})`);
}
