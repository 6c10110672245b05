import { describe, expect, it } from 'vitest';

import { buildSliderGroups, coveredIndices, displayValue } from '../src/schema.js';
import { schemaFixture } from './fixtures.js';

describe('slider groups', () => {
  it('mirror the schema exactly: 33 slots, indices 1..33 once each', () => {
    const groups = buildSliderGroups(schemaFixture());
    expect(coveredIndices(groups)).toEqual(Array.from({ length: 33 }, (_, i) => i + 1));
  });

  it('render one-hot groups as exclusive selectors with the right members', () => {
    const groups = buildSliderGroups(schemaFixture());
    const onehots = groups.flatMap((g) => g.controls).filter((c) => c.kind === 'onehot');
    const got = new Set(onehots.map((c) => (c.kind === 'onehot' ? c.indices.join(',') : '')));
    expect(got).toEqual(new Set(['12,13,14', '16,17,18', '21,22', '25,26', '29,30', '31,32,33']));
  });

  it('keep the six panel groups in presentation order', () => {
    const labels = buildSliderGroups(schemaFixture()).map((g) => g.label);
    expect(labels).toEqual(['blur-1', 'blur-2/sinc', 'resize', 'noise-1', 'noise-2', 'jpeg/order']);
  });

  it('reject slots whose group the panel does not know', () => {
    const schema = schemaFixture();
    schema.slots[0].group = 'mystery';
    expect(() => buildSliderGroups(schema)).toThrow(/mystery/);
  });
});

describe('display values', () => {
  const slots = schemaFixture().slots;
  const byName = (name: string) => slots.find((s) => s.name === name)!;

  it('de-normalizes scalars with the service-provided range', () => {
    // sigma slot: 0.5 -> 0.2 + 0.5*(3 - 0.2) = 1.6
    expect(displayValue(byName('blur1.sigma1'), 0.5)).toBe('1.600');
    expect(displayValue(byName('jpeg1.quality'), 0.0)).toBe('q30');
    expect(displayValue(byName('blur1.kernel_half'), 1.0)).toBe('21px kernel');
    expect(displayValue(byName('resize1.scale'), 1.0)).toBe('x1.500');
  });

  it('shows flags and one-hot members symbolically', () => {
    expect(displayValue(byName('noise1.gray'), 1)).toBe('on');
    expect(displayValue(byName('noise1.gray'), 0)).toBe('off');
    const area = slots.find((s) => s.index === 12)!;
    expect(displayValue(area, 1)).toBe('area');
    expect(displayValue(area, 0)).toBe('');
  });
});
