// View state and its transitions. A customer session is pinned to its own
// meter, mirroring the server-side 403s.

export type ViewName = "consumption" | "patterns" | "segments" | "forecast" | "anomalies";

export interface ViewState {
  role: "utility" | "customer";
  ownMeterId?: string;
  selectedMeter: string | null;
  granularity: "hourly" | "daily" | "weekly" | "monthly";
  from?: string;
  to?: string;
  view: ViewName;
  pollSeconds: number;
}

export function initialState(role: "utility" | "customer", ownMeterId?: string): ViewState {
  return {
    role,
    ownMeterId,
    selectedMeter: role === "customer" ? (ownMeterId ?? null) : null,
    granularity: "daily",
    view: "consumption",
    pollSeconds: 5,
  };
}

export function selectMeter(state: ViewState, meterId: string): ViewState {
  if (state.role === "customer" && meterId !== state.ownMeterId) {
    throw new Error("customers may only view their own meter");
  }
  return { ...state, selectedMeter: meterId };
}

export function setGranularity(state: ViewState, granularity: ViewState["granularity"]): ViewState {
  return { ...state, granularity };
}

export function setView(state: ViewState, view: ViewName): ViewState {
  if (state.role === "customer" && view === "segments") {
    throw new Error("segmentation is a utility view");
  }
  return { ...state, view };
}

export function setRange(state: ViewState, from?: string, to?: string): ViewState {
  return { ...state, from, to };
}
