import { ApiClient } from './api.js';
import { Box } from './types.js';
import {
  Corner,
  clampToImage,
  dragCorner,
  fitTransform,
  hitCorner,
  imageToViewport,
  ViewTransform,
} from './geometry.js';
import { paintOverlay, showBanner, showError } from './render.js';
import { VerdictQueue } from './queue.js';
import { overlayFor, ReviewViewModel } from './viewmodel.js';

const qs = new URLSearchParams(window.location.search);
const api = new ApiClient(qs.get('api') ?? '', undefined, qs.get('reviewer') ?? 'reviewer');
const queue = new VerdictQueue(window.localStorage);
const vm = new ReviewViewModel();

const imageEl = document.getElementById('image') as HTMLImageElement;
const canvas = document.getElementById('overlay') as HTMLCanvasElement;
const bannerEl = document.getElementById('banner') as HTMLElement;
const errorEl = document.getElementById('error') as HTMLElement;
const progressEl = document.getElementById('progress') as HTMLElement;
const positionEl = document.getElementById('position') as HTMLElement;
const queueEl = document.getElementById('queue-state') as HTMLElement;

let transform: ViewTransform = { scale: 1, ox: 0, oy: 0 };
let drag: { role: 'human_box' | 'object_box'; corner: Corner; lastX: number; lastY: number } | null =
  null;

function repaint(): void {
  const item = vm.currentItem();
  if (!item) {
    showBanner(bannerEl, 'batch empty');
    return;
  }
  transform = fitTransform(item.width, item.height, canvas.width, canvas.height);
  const selected = vm.currentAnnotation()?.annotation_id ?? null;
  const model = overlayFor(item, transform, selected);
  // while editing, the edited geometry replaces the selected annotation's boxes
  if (vm.editing && selected) {
    for (const box of model.boxes) {
      if (box.annotationId === selected) {
        const src = box.role === 'human' ? vm.editing.human_box : vm.editing.object_box;
        box.rect = imageToViewport(src, transform);
      }
    }
  }
  paintOverlay(canvas.getContext('2d')!, model);
  showBanner(bannerEl, model.banner);
  const p = vm.progress();
  progressEl.textContent =
    `pending ${p.pending} · accepted ${p.accepted} · rejected ${p.rejected} · edited ${p.edited}`;
  positionEl.textContent = `image ${vm.itemIndex + 1}/${vm.items.length} — ${item.image_id}` +
    (vm.editing ? ' (editing: drag a corner, Enter to save, Esc to cancel)' : '');
  queueEl.textContent = queue.length ? `${queue.length} unsent` : 'synced';
}

function loadImage(): void {
  const item = vm.currentItem();
  if (!item) {
    return;
  }
  showError(errorEl, null);
  imageEl.src = api.imageUrl(item.image_id);
}

imageEl.addEventListener('load', repaint);
imageEl.addEventListener('error', () => {
  showError(errorEl, `failed to load image ${vm.currentItem()?.image_id ?? ''}`, loadImage);
});

async function drainQueue(): Promise<void> {
  const sent = await queue.drain((v) => api.postVerdict(v));
  if (sent > 0) {
    repaint();
  }
}

function decide(decision: 'accept' | 'reject' | 'edit'): void {
  if (decision === 'edit' && !vm.editing) {
    vm.beginEdit();
    repaint();
    return; // first press enters edit mode; Enter commits
  }
  const event = vm.decide(decision);
  if (!event) {
    return;
  }
  queue.enqueue(event.verdict);
  void drainQueue();
  loadImage();
  repaint();
}

window.addEventListener('keydown', (e) => {
  if (e.key === 'a') {
    decide('accept');
  } else if (e.key === 'r') {
    decide('reject');
  } else if (e.key === 'e') {
    decide('edit');
  } else if (e.key === 'Enter' && vm.editing) {
    decide('edit');
  } else if (e.key === 'Escape') {
    vm.editing = null;
    repaint();
  } else if (e.key === 'Tab') {
    e.preventDefault();
    const item = vm.currentItem();
    if (item) {
      vm.selectAnnotation((vm.selectedAnnotation + 1) % item.annotations.length);
      repaint();
    }
  } else if (e.key === 'ArrowRight') {
    vm.gotoItem(vm.itemIndex + 1);
    loadImage();
    repaint();
  } else if (e.key === 'ArrowLeft') {
    vm.gotoItem(vm.itemIndex - 1);
    loadImage();
    repaint();
  }
});

canvas.addEventListener('pointerdown', (e) => {
  if (!vm.editing) {
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const x = e.clientX - rect.left;
  const y = e.clientY - rect.top;
  for (const role of ['human_box', 'object_box'] as const) {
    const viewBox = imageToViewport(vm.editing[role], transform);
    const corner = hitCorner(viewBox, x, y, 8);
    if (corner) {
      drag = { role, corner, lastX: x, lastY: y };
      canvas.setPointerCapture(e.pointerId);
      return;
    }
  }
});

canvas.addEventListener('pointermove', (e) => {
  if (!drag || !vm.editing) {
    return;
  }
  const rect = canvas.getBoundingClientRect();
  const x = e.clientX - rect.left;
  const y = e.clientY - rect.top;
  const item = vm.currentItem();
  if (!item) {
    return;
  }
  // convert the viewport delta into image pixels through the shared transform
  const dx = (x - drag.lastX) / transform.scale;
  const dy = (y - drag.lastY) / transform.scale;
  drag.lastX = x;
  drag.lastY = y;
  const moved = clampToImage(
    dragCorner(vm.editing[drag.role] as Box, drag.corner, dx, dy),
    item.width,
    item.height,
  );
  vm.updateEdit({ [drag.role]: moved });
  repaint();
});

canvas.addEventListener('pointerup', () => {
  drag = null;
});

window.addEventListener('online', () => void drainQueue());
setInterval(() => void drainQueue(), 5000);

async function start(): Promise<void> {
  try {
    vm.load(await api.fetchAllItems());
    loadImage();
    repaint();
    void drainQueue();
  } catch (e) {
    showError(errorEl, `cannot reach the review service: ${e}`, () => void start());
  }
}

void start();
