/**
 * View state and pure rendering math.
 *
 * The cost bar's pixel height is a monotone function of the received
 * display value (which the server already square-root transformed); the
 * client adds no easing or smoothing to the underlying value, so what you
 * see each frame is exactly what the server computed.  No machine-action
 * information exists anywhere in the view.
 */

export type Banner =
  | { kind: 'intro' }
  | { kind: 'trial'; index: number; total: number; attention: boolean }
  | { kind: 'rest'; secondsLeft: number }
  | { kind: 'survey' }
  | { kind: 'done' }
  | { kind: 'disconnected' };

export interface ClientView {
  banner: Banner;
  display: number | null;   // last received display value
  target: number | null;    // attention marker position in [-1, 1]
  progress: number;         // samples seen this trial / expected
}

export const INITIAL_VIEW: ClientView = {
  banner: { kind: 'intro' },
  display: null,
  target: null,
  progress: 0,
};

/** Bar height in pixels: proportional up to a display ceiling, then capped. */
export function barHeight(display: number, maxPixels: number, ceiling = 1.5): number {
  if (!(display > 0)) {
    return 0;
  }
  const scaled = Math.min(display / ceiling, 1);
  return scaled * maxPixels;
}

/** Target marker position in pixels from the left edge. */
export function markerLeft(target: number, width: number): number {
  return ((target + 1) / 2) * width;
}

export function describeBanner(banner: Banner): string {
  switch (banner.kind) {
    case 'intro':
      return 'Make the black bar as small as possible. Press start when ready.';
    case 'trial':
      return banner.attention
        ? `Trial ${banner.index + 1}/${banner.total}: move the cursor to the marker and hold`
        : `Trial ${banner.index + 1}/${banner.total}`;
    case 'rest':
      return `Rest break: ${Math.ceil(banner.secondsLeft)}s`;
    case 'survey':
      return 'Please fill in the survey';
    case 'done':
      return 'All done — thank you!';
    case 'disconnected':
      return 'Connection lost — reconnecting…';
  }
}
