import { OverlayModel } from './viewmodel.js';

/** Paint the overlay model onto the canvas; all layout decisions are upstream. */
export function paintOverlay(ctx: CanvasRenderingContext2D, model: OverlayModel): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  for (const box of model.boxes) {
    const [x1, y1, x2, y2] = box.rect;
    ctx.lineWidth = box.selected ? 3 : 1.5;
    ctx.strokeStyle = box.color;
    ctx.strokeRect(x1, y1, x2 - x1, y2 - y1);
    if (box.selected) {
      ctx.fillStyle = box.color;
      for (const [cx, cy] of [[x1, y1], [x2, y1], [x1, y2], [x2, y2]] as const) {
        ctx.fillRect(cx - 4, cy - 4, 8, 8);
      }
    }
  }
  ctx.font = '13px sans-serif';
  for (const caption of model.captions) {
    const label = `${caption.text}${caption.status !== 'pending' ? ` [${caption.status}]` : ''}`;
    const width = ctx.measureText(label).width + 8;
    ctx.fillStyle = caption.selected ? 'rgba(46, 134, 222, 0.9)' : 'rgba(0, 0, 0, 0.65)';
    ctx.fillRect(caption.x, caption.y - 14, width, 18);
    ctx.fillStyle = '#fff';
    ctx.fillText(label, caption.x + 4, caption.y);
  }
}

export function showBanner(el: HTMLElement, text: string | null): void {
  el.textContent = text ?? '';
  el.style.display = text ? 'block' : 'none';
}

export function showError(el: HTMLElement, message: string | null, onRetry?: () => void): void {
  el.innerHTML = '';
  el.style.display = message ? 'flex' : 'none';
  if (!message) {
    return;
  }
  const span = document.createElement('span');
  span.textContent = message;
  el.appendChild(span);
  if (onRetry) {
    const button = document.createElement('button');
    button.textContent = 'retry';
    button.addEventListener('click', onRetry);
    el.appendChild(button);
  }
}
