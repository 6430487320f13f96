/**
 * Cursor capture: a pointer position scaled to the browser window width so
 * that the left edge maps to -1 and the right edge to +1.  Mouse and touch
 * both land here.  Positions outside the window clamp to the edges.
 */

export function normalizeX(clientX: number, windowWidth: number): number {
  if (!(windowWidth > 0)) {
    return 0;
  }
  const x = (2 * clientX) / windowWidth - 1;
  return Math.min(1, Math.max(-1, x));
}

export type CursorListener = (x: number) => void;

/** Wire pointer + touch movement into normalized updates; returns a detach. */
export function capturePointer(
  target: Window,
  listener: CursorListener,
): () => void {
  const onPointer = (event: PointerEvent | MouseEvent) => {
    listener(normalizeX(event.clientX, target.innerWidth));
  };
  const onTouch = (event: TouchEvent) => {
    if (event.touches.length > 0) {
      listener(normalizeX(event.touches[0].clientX, target.innerWidth));
    }
  };
  target.addEventListener('pointermove', onPointer as EventListener);
  target.addEventListener('touchmove', onTouch as EventListener, { passive: true });
  return () => {
    target.removeEventListener('pointermove', onPointer as EventListener);
    target.removeEventListener('touchmove', onTouch as EventListener);
  };
}
