// Per-tab session state: the uploaded image, the predicted vector, the
// user-edited vector, results, and a bounded history of steps.  At most one
// inference request is in flight; edits arriving during a flight are queued
// latest-wins.

import type { ServiceClient, SuperResolveResponse } from './api.js';

export const HISTORY_LIMIT = 20;

export interface HistoryStep {
  vector: number[];
  imageB64: string; // result (thumbnail source)
}

export interface SessionSnapshot {
  predicted: number[];
  edited: number[];
  weights: number[];
  resultB64: string | null;
  previousB64: string | null;
  history: HistoryStep[];
}

export class Session {
  private predicted: number[] = [];
  private edited: number[] = [];
  private weights: number[] = [];
  private resultB64: string | null = null;
  private previousB64: string | null = null;
  private history: HistoryStep[] = [];

  private inFlight = false;
  private pendingRun = false;
  private listeners: Array<(s: SessionSnapshot) => void> = [];

  constructor(
    private readonly client: ServiceClient,
    private sourceB64: string | null = null,
  ) {}

  onChange(listener: (s: SessionSnapshot) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) listener(snap);
  }

  snapshot(): SessionSnapshot {
    return {
      predicted: [...this.predicted],
      edited: [...this.edited],
      weights: [...this.weights],
      resultB64: this.resultB64,
      previousB64: this.previousB64,
      history: [...this.history],
    };
  }

  get source(): string | null {
    return this.sourceB64;
  }

  /** Upload: predict the degradation and reset all per-image state. */
  async loadImage(imageB64: string): Promise<void> {
    const prediction = await this.client.predict(imageB64);
    // only commit state once the service accepted the image
    this.sourceB64 = imageB64;
    this.predicted = [...prediction.vector];
    this.edited = [...prediction.vector];
    this.weights = [];
    this.resultB64 = null;
    this.previousB64 = null;
    this.history = [];
    this.emit();
  }

  setSlot(index: number, value: number): void {
    // index is 1-based, mirroring the vector slot numbering
    this.edited[index - 1] = value;
    this.emit();
  }

  setOnehot(indices: number[], chosen: number): void {
    for (const index of indices) this.edited[index - 1] = index === chosen ? 1 : 0;
    this.emit();
  }

  /** Restore the sliders to the service's prediction. */
  reset(): void {
    this.edited = [...this.predicted];
    this.emit();
  }

  get editedVector(): number[] {
    return [...this.edited];
  }

  /**
   * Run super-resolution with the current slider state as the override
   * vector.  Exactly one request per settled run; a run requested while one
   * is in flight is coalesced into a single trailing rerun of the latest
   * state.
   */
  async rerun(): Promise<void> {
    if (!this.sourceB64) throw new Error('no image loaded');
    if (this.inFlight) {
      this.pendingRun = true;
      return;
    }
    this.inFlight = true;
    try {
      const response = await this.client.superResolve(this.sourceB64, this.editedVector);
      this.applyResult(response);
    } finally {
      this.inFlight = false;
    }
    if (this.pendingRun) {
      this.pendingRun = false;
      await this.rerun();
    }
  }

  private applyResult(response: SuperResolveResponse): void {
    this.previousB64 = this.resultB64;
    this.resultB64 = response.image;
    this.weights = [...response.a];
    this.history.push({ vector: this.editedVector, imageB64: response.image });
    if (this.history.length > HISTORY_LIMIT) this.history.shift(); // evict oldest
    this.emit();
  }

  /** Preview what the current vector's degradation does to the upload. */
  async previewDegradation(seed = 0): Promise<string> {
    if (!this.sourceB64) throw new Error('no image loaded');
    const response = await this.client.degrade(this.sourceB64, this.editedVector, seed);
    return response.image;
  }
}
