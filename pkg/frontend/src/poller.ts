// Simple polling loop: one in-flight request at a time, last write wins.
// Overlapping responses from stale polls are dropped by generation count.

export class Poller<T> {
  private timer: ReturnType<typeof setInterval> | null = null;
  private generation = 0;

  constructor(
    private readonly fetchFn: () => Promise<T>,
    private readonly onData: (data: T) => void,
    private readonly onError: (err: unknown) => void = () => {},
  ) {}

  async pollOnce(): Promise<void> {
    const gen = ++this.generation;
    try {
      const data = await this.fetchFn();
      if (gen === this.generation) this.onData(data);
    } catch (err) {
      if (gen === this.generation) this.onError(err);
    }
  }

  start(intervalMs: number): void {
    this.stop();
    void this.pollOnce();
    this.timer = setInterval(() => void this.pollOnce(), intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
    this.generation++;
  }
}
