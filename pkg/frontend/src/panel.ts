// DOM wiring: renders the slider groups from the live schema, the
// side-by-side result comparison, the degradation playground preview, and
// the history strip.

import type { SchemaResponse, SlotDescriptor } from './api.js';
import { ServiceClient } from './api.js';
import { buildSliderGroups } from './schema.js';
import { displayValue } from './schema.js';
import { Session } from './session.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function pngUrl(b64: string): string {
  return `data:image/png;base64,${b64}`;
}

export class Panel {
  private session: Session;
  private slotByIndex = new Map<number, SlotDescriptor>();
  private sliderInputs = new Map<number, HTMLInputElement>();
  private valueLabels = new Map<number, HTMLElement>();

  constructor(
    private readonly root: HTMLElement,
    client: ServiceClient,
    private readonly schema: SchemaResponse,
  ) {
    this.session = new Session(client);
    for (const slot of schema.slots) this.slotByIndex.set(slot.index, slot);
    this.render();
    this.session.onChange(() => this.refresh());
  }

  static async mount(root: HTMLElement, base = ''): Promise<Panel> {
    const client = new ServiceClient(base);
    const schema = await client.getSchema();
    return new Panel(root, client, schema);
  }

  private banner(message: string, isError = true): void {
    const box = this.root.querySelector('.banner') as HTMLElement;
    box.textContent = message;
    box.classList.toggle('error', isError);
    box.style.display = message ? 'block' : 'none';
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    try {
      this.banner('');
      await action();
    } catch (err) {
      this.banner(err instanceof Error ? err.message : String(err));
    }
  }

  private render(): void {
    this.root.innerHTML = '';
    this.root.append(el('div', 'banner'));

    const upload = el('div', 'upload');
    const file = el('input') as HTMLInputElement;
    file.type = 'file';
    file.accept = 'image/png,image/jpeg';
    file.addEventListener('change', () => {
      const chosen = file.files?.[0];
      if (chosen) void this.guarded(() => this.handleUpload(chosen));
    });
    upload.append(file);
    this.root.append(upload);

    const columns = el('div', 'columns');
    const controls = el('div', 'controls');
    for (const group of buildSliderGroups(this.schema)) {
      const section = el('fieldset', 'group');
      section.append(el('legend', undefined, group.label));
      for (const control of group.controls) {
        if (control.kind === 'onehot') {
          section.append(this.renderOnehot(control.name, control.indices, control.choices));
        } else {
          section.append(this.renderSlider(control.index, control.name));
        }
      }
      controls.append(section);
    }

    const actions = el('div', 'actions');
    const rerun = el('button', undefined, 'Super-resolve');
    rerun.addEventListener('click', () => void this.guarded(() => this.session.rerun()));
    const reset = el('button', undefined, 'Reset to prediction');
    reset.addEventListener('click', () => this.session.reset());
    const preview = el('button', undefined, 'Preview degradation');
    preview.addEventListener('click', () => void this.guarded(async () => {
      const b64 = await this.session.previewDegradation();
      (this.root.querySelector('.playground img') as HTMLImageElement).src = pngUrl(b64);
    }));
    actions.append(rerun, reset, preview);
    controls.append(actions);

    const results = el('div', 'results');
    const pair = el('div', 'side-by-side');
    for (const name of ['previous', 'current']) {
      const cell = el('figure', name);
      cell.append(el('img') as HTMLImageElement, el('figcaption', undefined, name));
      pair.append(cell);
    }
    const playground = el('figure', 'playground');
    playground.append(el('img') as HTMLImageElement,
                      el('figcaption', undefined, 'degradation preview'));
    const weights = el('div', 'weights');
    const history = el('div', 'history');
    results.append(pair, playground, weights, history);

    columns.append(controls, results);
    this.root.append(columns);
  }

  private renderSlider(index: number, name: string): HTMLElement {
    const row = el('label', 'slider');
    row.append(el('span', 'name', `v${index} ${name}`));
    const input = el('input') as HTMLInputElement;
    input.type = 'range';
    input.min = '0';
    input.max = '1';
    input.step = '0.001';
    input.value = '0';
    input.dataset.slot = String(index);
    // drag updates the label; releasing commits the edit and reruns once
    input.addEventListener('input', () => {
      this.session.setSlot(index, Number(input.value));
    });
    input.addEventListener('change', () => {
      void this.guarded(() => this.session.rerun());
    });
    const value = el('span', 'value');
    row.append(input, value);
    this.sliderInputs.set(index, input);
    this.valueLabels.set(index, value);
    this.refreshLabel(index, 0);
    return row;
  }

  private renderOnehot(name: string, indices: number[], choices: string[]): HTMLElement {
    const row = el('div', 'onehot');
    row.append(el('span', 'name', name));
    for (let i = 0; i < indices.length; i++) {
      const option = el('label');
      const radio = el('input') as HTMLInputElement;
      radio.type = 'radio';
      radio.name = name;
      radio.dataset.slot = String(indices[i]);
      radio.addEventListener('change', () => {
        this.session.setOnehot(indices, indices[i]);
        void this.guarded(() => this.session.rerun());
      });
      option.append(radio, document.createTextNode(choices[i]));
      row.append(option);
    }
    return row;
  }

  private async handleUpload(file: File): Promise<void> {
    if (!file.type.startsWith('image/')) {
      throw new Error(`not an image file: ${file.name}`);
    }
    const b64 = await fileToBase64(file);
    await this.session.loadImage(b64); // clears history, repopulates sliders
  }

  private refreshLabel(index: number, value: number): void {
    const slot = this.slotByIndex.get(index)!;
    const label = this.valueLabels.get(index);
    if (label) label.textContent = displayValue(slot, value);
  }

  private refresh(): void {
    const snap = this.session.snapshot();
    for (const [index, input] of this.sliderInputs) {
      const value = snap.edited[index - 1] ?? 0;
      input.value = String(Math.min(1, Math.max(0, value)));
      this.refreshLabel(index, value);
    }
    const radios = this.root.querySelectorAll<HTMLInputElement>('input[type=radio]');
    radios.forEach((radio) => {
      const slot = Number(radio.dataset.slot);
      radio.checked = (snap.edited[slot - 1] ?? 0) > 0.5;
    });

    const [prevImg, curImg] = this.root.querySelectorAll<HTMLImageElement>('.side-by-side img');
    if (snap.previousB64) prevImg.src = pngUrl(snap.previousB64);
    if (snap.resultB64) curImg.src = pngUrl(snap.resultB64);

    const weights = this.root.querySelector('.weights') as HTMLElement;
    weights.textContent = snap.weights.length
      ? `expert weights: ${snap.weights.map((x) => x.toFixed(3)).join(', ')}`
      : '';

    const history = this.root.querySelector('.history') as HTMLElement;
    history.innerHTML = '';
    for (const step of snap.history) {
      const thumb = el('img', 'thumb') as HTMLImageElement;
      thumb.src = pngUrl(step.imageB64);
      thumb.title = `v = [${step.vector.slice(0, 4).map((x) => x.toFixed(2)).join(', ')} ...]`;
      history.append(thumb);
    }
  }
}

export function fileToBase64(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => {
      const url = reader.result as string;
      resolve(url.slice(url.indexOf(',') + 1));
    };
    reader.onerror = () => reject(new Error('could not read file'));
    reader.readAsDataURL(file);
  });
}
