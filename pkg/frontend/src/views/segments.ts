import { ApiClient } from "../api.js";
import { scatterChart } from "../charts.js";
import { centroidScatter } from "../series.js";
import type { ViewState } from "../state.js";

// The geographic map of the source portal becomes a 2-D feature scatter:
// coordinates are not part of the schema, cluster features are.
export async function renderSegments(
  container: HTMLElement,
  api: ApiClient,
  _state: ViewState,
  k = 3,
): Promise<void> {
  const segments = await api.segments(k);
  const centroids = centroidScatter(segments, "base_load", "activity_load");
  const members = segments.clusters
    .map(
      (c) =>
        `<li><span class="swatch c${c.index}"></span>cluster ${c.index}: ` +
        `${c.members.length} meters (${c.members.slice(0, 8).join(", ")}` +
        `${c.members.length > 8 ? ", ..." : ""})</li>`,
    )
    .join("");
  container.innerHTML =
    scatterChart(centroids, "cluster centroids: base load vs activity load") +
    `<ul class="clusters">${members}</ul>`;
}
