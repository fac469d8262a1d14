/**
 * Serializes generation requests: one in flight, later submissions wait
 * their turn in submission order.
 */
export class SerialQueue {
  private chain: Promise<void> = Promise.resolve();
  private waiting = 0;
  private running = false;

  run<T>(task: () => Promise<T>): Promise<T> {
    this.waiting += 1;
    const result = this.chain.then(() => {
      this.waiting -= 1;
      this.running = true;
      return task();
    });
    this.chain = result.then(
      () => {
        this.running = false;
      },
      () => {
        this.running = false;
      },
    );
    return result;
  }

  /** Submissions accepted but not yet started. */
  get queued(): number {
    return this.waiting;
  }

  get busy(): boolean {
    return this.running || this.waiting > 0;
  }
}
