// Slider-group construction: the layout mirrors GET /schema exactly, so a
// schema change on the service side can never desynchronize the panel.

import type { SchemaResponse, SlotDescriptor } from './api.js';

export interface ScalarSlider {
  kind: 'scalar' | 'flag';
  index: number;
  name: string;
  range: [number, number];
}

export interface OnehotSelector {
  kind: 'onehot';
  name: string;
  indices: number[]; // 1-based, exclusive group
  choices: string[];
}

export type Control = ScalarSlider | OnehotSelector;

export interface SliderGroup {
  label: string;
  controls: Control[];
}

const GROUP_ORDER = ['blur-1', 'blur-2/sinc', 'resize', 'noise-1', 'noise-2', 'jpeg/order'];

export function buildSliderGroups(schema: SchemaResponse): SliderGroup[] {
  const byLabel = new Map<string, SliderGroup>();
  for (const label of GROUP_ORDER) byLabel.set(label, { label, controls: [] });

  const seenOnehot = new Set<string>();
  for (const slot of schema.slots) {
    const group = byLabel.get(slot.group);
    if (!group) throw new Error(`unknown slider group ${slot.group}`);
    if (slot.kind === 'onehot') {
      if (seenOnehot.has(slot.name)) continue; // one selector per exclusive group
      seenOnehot.add(slot.name);
      const members = schema.slots
        .filter((s) => s.kind === 'onehot' && s.name === slot.name)
        .sort((a, b) => a.index - b.index);
      group.controls.push({
        kind: 'onehot',
        name: slot.name,
        indices: members.map((m) => m.index),
        choices: members.map((m) => m.choice ?? ''),
      });
    } else {
      group.controls.push({
        kind: slot.kind,
        index: slot.index,
        name: slot.name,
        range: slot.range ?? [0, 1],
      });
    }
  }
  return GROUP_ORDER.map((label) => byLabel.get(label)!);
}

export function coveredIndices(groups: SliderGroup[]): number[] {
  const indices: number[] = [];
  for (const group of groups) {
    for (const control of group.controls) {
      if (control.kind === 'onehot') indices.push(...control.indices);
      else indices.push(control.index);
    }
  }
  return indices.sort((a, b) => a - b);
}

// De-normalized display value with units, using the service-provided range.
export function displayValue(slot: SlotDescriptor, value: number): string {
  if (slot.kind === 'flag') return value > 0.5 ? 'on' : 'off';
  if (slot.kind === 'onehot') return value > 0.5 ? (slot.choice ?? '?') : '';
  const [lo, hi] = slot.range ?? [0, 1];
  const physical = lo + value * (hi - lo);
  if (slot.name.includes('kernel_half')) return `${2 * Math.round(physical) + 1}px kernel`;
  if (slot.name.includes('quality')) return `q${Math.round(physical)}`;
  if (slot.name.includes('theta')) return `${physical.toFixed(2)} rad`;
  if (slot.name.includes('omega')) return `${physical.toFixed(2)} rad/px`;
  if (slot.name.includes('scale')) return `x${physical.toFixed(3)}`;
  return physical.toFixed(3);
}
