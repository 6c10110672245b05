// Schema fixture with the same slot layout the service publishes (the
// Python suite asserts the service side of this contract).

import type { SchemaResponse, SlotDescriptor } from '../src/api.js';

const RESIZE = ['area', 'bilinear', 'bicubic'];
const NOISE = ['gaussian', 'poisson'];
const ORDERS = ['resize-then-jpeg', 'jpeg-then-resize'];

interface GroupRow {
  indices: number[];
  name: string;
  group: string;
  kind: 'scalar' | 'flag' | 'onehot';
  stage: number;
  range?: [number, number];
  choices?: string[];
}

const LAYOUT: GroupRow[] = [
  { indices: [1], name: 'blur1.kernel_half', group: 'blur-1', kind: 'scalar', stage: 1, range: [3, 10] },
  { indices: [2], name: 'blur1.sigma1', group: 'blur-1', kind: 'scalar', stage: 1, range: [0.2, 3] },
  { indices: [3], name: 'blur1.sigma2', group: 'blur-1', kind: 'scalar', stage: 1, range: [0.2, 3] },
  { indices: [4], name: 'blur1.theta', group: 'blur-1', kind: 'scalar', stage: 1, range: [-Math.PI, Math.PI] },
  { indices: [5], name: 'blur2.kernel_half', group: 'blur-2/sinc', kind: 'scalar', stage: 2, range: [3, 10] },
  { indices: [6], name: 'blur2.sigma1', group: 'blur-2/sinc', kind: 'scalar', stage: 2, range: [0.2, 1.5] },
  { indices: [7], name: 'blur2.sigma2', group: 'blur-2/sinc', kind: 'scalar', stage: 2, range: [0.2, 1.5] },
  { indices: [8], name: 'blur2.theta', group: 'blur-2/sinc', kind: 'scalar', stage: 2, range: [-Math.PI, Math.PI] },
  { indices: [9], name: 'sinc.kernel_half', group: 'blur-2/sinc', kind: 'scalar', stage: 2, range: [3, 10] },
  { indices: [10], name: 'sinc.omega_c', group: 'blur-2/sinc', kind: 'scalar', stage: 2, range: [Math.PI / 3, Math.PI] },
  { indices: [11], name: 'resize1.scale', group: 'resize', kind: 'scalar', stage: 1, range: [0.15, 1.5] },
  { indices: [12, 13, 14], name: 'resize1.mode', group: 'resize', kind: 'onehot', stage: 1, choices: RESIZE },
  { indices: [15], name: 'resize2.scale', group: 'resize', kind: 'scalar', stage: 2, range: [0.3, 1.2] },
  { indices: [16, 17, 18], name: 'resize2.mode', group: 'resize', kind: 'onehot', stage: 2, choices: RESIZE },
  { indices: [19], name: 'noise1.level', group: 'noise-1', kind: 'scalar', stage: 1, range: [1, 30] },
  { indices: [20], name: 'noise1.gray', group: 'noise-1', kind: 'flag', stage: 1 },
  { indices: [21, 22], name: 'noise1.kind', group: 'noise-1', kind: 'onehot', stage: 1, choices: NOISE },
  { indices: [23], name: 'noise2.level', group: 'noise-2', kind: 'scalar', stage: 2, range: [1, 25] },
  { indices: [24], name: 'noise2.gray', group: 'noise-2', kind: 'flag', stage: 2 },
  { indices: [25, 26], name: 'noise2.kind', group: 'noise-2', kind: 'onehot', stage: 2, choices: NOISE },
  { indices: [27], name: 'jpeg1.quality', group: 'jpeg/order', kind: 'scalar', stage: 1, range: [30, 95] },
  { indices: [28], name: 'jpeg2.quality', group: 'jpeg/order', kind: 'scalar', stage: 2, range: [30, 95] },
  { indices: [29, 30], name: 'jpeg2.order', group: 'jpeg/order', kind: 'onehot', stage: 2, choices: ORDERS },
  { indices: [31, 32, 33], name: 'final_resize.mode', group: 'jpeg/order', kind: 'onehot', stage: 1, choices: RESIZE },
];

export function schemaFixture(): SchemaResponse {
  const slots: SlotDescriptor[] = [];
  for (const row of LAYOUT) {
    row.indices.forEach((index, pos) => {
      const slot: SlotDescriptor = {
        index,
        name: row.name,
        group: row.group,
        kind: row.kind,
        stage: row.stage,
      };
      if (row.kind === 'onehot') {
        slot.choice = row.choices![pos];
        slot.group_indices = [...row.indices];
      } else {
        slot.range = row.range ?? [0, 1];
      }
      slots.push(slot);
    });
  }
  return {
    vector_length: 33,
    slots,
    levels: ['S1', 'S2', 'S3'],
    presets: { S1: vectorFixture(0.2), S2: vectorFixture(0.4), S3: vectorFixture(0.6) },
  };
}

export function vectorFixture(fill = 0.5): number[] {
  return Array.from({ length: 33 }, () => fill);
}
