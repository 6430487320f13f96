import { describe, expect, it } from 'vitest';

import { barHeight, describeBanner, markerLeft } from '../src/view.js';

describe('cost bar', () => {
  it('zero display gives a zero-height bar', () => {
    expect(barHeight(0, 600)).toBe(0);
  });

  it('is strictly monotone below the ceiling', () => {
    const values = [0, 0.01, 0.1, 0.3, 0.5, 1.0, 1.4];
    const heights = values.map((v) => barHeight(v, 600));
    for (let i = 1; i < heights.length; i++) {
      expect(heights[i]).toBeGreaterThan(heights[i - 1]);
    }
  });

  it('caps at the stage height', () => {
    expect(barHeight(99, 600)).toBe(600);
  });

  it('negative or NaN displays clamp to zero', () => {
    expect(barHeight(-0.1, 600)).toBe(0);
    expect(barHeight(Number.NaN, 600)).toBe(0);
  });
});

describe('attention marker', () => {
  it('maps targets across the stage width', () => {
    expect(markerLeft(-1, 800)).toBe(0);
    expect(markerLeft(0, 800)).toBe(400);
    expect(markerLeft(1, 800)).toBe(800);
  });
});

describe('banners', () => {
  it('rest shows a whole-second countdown', () => {
    expect(describeBanner({ kind: 'rest', secondsLeft: 29.2 })).toContain('30s');
  });

  it('attention phase asks for the marker', () => {
    const text = describeBanner({ kind: 'trial', index: 0, total: 20, attention: true });
    expect(text).toContain('marker');
    expect(text).toContain('1/20');
  });
});
