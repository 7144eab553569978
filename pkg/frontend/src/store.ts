// Workspace state machine for the what-if explorer.
//
// All evaluation happens server-side; this store only batches edits,
// sequences requests, and mirrors the service's reports. The report shown
// always corresponds to the enabled slots and drafts: while a request is in
// flight the previous report is flagged stale, and responses that arrive
// out of order are dropped (latest state wins).

import type { ServiceClient } from './api'
import { ServiceError } from './api'
import { toCanonicalYaml } from './cards'
import { valueConforms } from './forms'
import type {
  AnalyzeBody,
  AttributeValue,
  Card,
  CardKind,
  Issue,
  Mutation,
  Report,
  SchemaResponse,
} from './types'

export interface Slot {
  id: number
  kind: 'data' | 'model'
  card: Card | null
  enabled: boolean
  issues: Issue[]
}

export type SlotRef = 'project' | number

export interface Comparison {
  before: Report
  after: Report
  label: string
}

export interface WorkspaceState {
  project: Card | null
  projectIssues: Issue[]
  slots: Slot[]
  report: Report | null
  stale: boolean
  delta: string[]
  comparison: Comparison | null
  pendingEdits: number
  connection: 'unknown' | 'ok' | 'down'
  error: string | null
}

export interface StoreOptions {
  debounceMs?: number
  /** Injectable scheduler so tests can drive the debounce window. */
  schedule?: (fn: () => void, ms: number) => unknown
  cancel?: (handle: unknown) => void
}

export class WorkspaceStore {
  readonly state: WorkspaceState = {
    project: null,
    projectIssues: [],
    slots: [],
    report: null,
    stale: false,
    delta: [],
    comparison: null,
    pendingEdits: 0,
    connection: 'unknown',
    error: null,
  }

  private schemas = new Map<CardKind, SchemaResponse>()
  private pending: Mutation[] = []
  private baseline: AnalyzeBody | null = null
  private seq = 0
  private debounceHandle: unknown = null
  private nextSlotId = 1
  private listeners: (() => void)[] = []
  private readonly debounceMs: number
  private readonly schedule: (fn: () => void, ms: number) => unknown
  private readonly cancel: (handle: unknown) => void

  constructor(
    private readonly client: ServiceClient,
    options: StoreOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 250
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms))
    this.cancel = options.cancel ?? ((handle) => clearTimeout(handle as number))
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener)
  }

  private notify(): void {
    for (const listener of this.listeners) listener()
  }

  async connect(): Promise<void> {
    this.state.connection = (await this.client.health()) ? 'ok' : 'down'
    if (this.state.connection === 'ok') {
      for (const kind of ['project', 'data', 'model'] as CardKind[]) {
        this.schemas.set(kind, await this.client.schema(kind))
      }
    }
    this.notify()
  }

  schemaFor(kind: CardKind): SchemaResponse | undefined {
    return this.schemas.get(kind)
  }

  addSlot(kind: 'data' | 'model'): Slot {
    const slot: Slot = { id: this.nextSlotId++, kind, card: null, enabled: true, issues: [] }
    this.state.slots.push(slot)
    this.notify()
    return slot
  }

  slot(ref: number): Slot {
    const found = this.state.slots.find((s) => s.id === ref)
    if (!found) throw new Error(`no slot ${ref}`)
    return found
  }

  // -- loading ------------------------------------------------------------

  /** Load a parsed card into a slot after server-side validation. */
  async loadCard(card: Card, ref: SlotRef): Promise<Issue[]> {
    const expected: CardKind = ref === 'project' ? 'project' : this.slot(ref).kind
    if (card.kind !== expected) {
      const issue: Issue = {
        severity: 'error',
        path: 'kind',
        message: `this slot expects a ${expected} card, got ${card.kind}`,
        code: 'WRONG_KIND',
      }
      this.setIssues(ref, [issue])
      this.notify()
      return [issue]
    }
    const response = await this.client.validateCard(card)
    this.setIssues(ref, response.issues)
    if (!response.valid) {
      this.notify()
      return response.issues
    }
    if (ref === 'project') {
      this.state.project = card
    } else {
      this.slot(ref).card = card
    }
    await this.reanalyze()
    return response.issues
  }

  private setIssues(ref: SlotRef, issues: Issue[]): void {
    if (ref === 'project') {
      this.state.projectIssues = issues
    } else {
      this.slot(ref).issues = issues
    }
  }

  // -- editing ------------------------------------------------------------

  /**
   * Queue an attribute edit; rejected client-side when the value violates
   * the attribute's domain. Batched into one what-if call per debounce
   * window.
   */
  editAttribute(ref: SlotRef, attributeId: string, value: AttributeValue): boolean {
    const card = ref === 'project' ? this.state.project : this.slot(ref).card
    if (!card) {
      this.state.error = 'slot holds no card'
      this.notify()
      return false
    }
    const schema = this.schemas.get(card.kind)
    const attr = schema?.attributes.find((a) => a.id === attributeId)
    if (!attr || !valueConforms(attr.domain, value)) {
      this.state.error = `invalid value for ${attributeId}`
      this.notify()
      return false
    }
    this.state.error = null
    if (value === null) {
      delete card.values[attributeId]
    } else {
      card.values[attributeId] = value
    }
    const included =
      ref === 'project' || (this.slot(ref).enabled && this.baselineHasCard(card.card_id))
    if (!included) {
      // Edits to excluded components change the draft only; the next
      // enable/analyze picks them up.
      this.notify()
      return true
    }
    this.pending = this.pending.filter(
      (m) => !(m.card_id === card.card_id && m.attribute_id === attributeId),
    )
    this.pending.push({ card_id: card.card_id, attribute_id: attributeId, value })
    this.state.pendingEdits = this.pending.length
    this.state.stale = true
    if (this.debounceHandle !== null) this.cancel(this.debounceHandle)
    this.debounceHandle = this.schedule(() => {
      this.debounceHandle = null
      void this.flushEdits()
    }, this.debounceMs)
    this.notify()
    return true
  }

  private baselineHasCard(cardId: string): boolean {
    if (!this.baseline) return false
    return [this.baseline.project, ...this.baseline.data, ...this.baseline.models].some(
      (c) => c.card_id === cardId,
    )
  }

  /** Send the queued edits as one /v1/whatif call against the last baseline. */
  async flushEdits(): Promise<void> {
    if (!this.baseline || this.pending.length === 0) {
      return this.reanalyze()
    }
    const mutations = [...this.pending]
    this.pending = []
    this.state.pendingEdits = 0
    const mySeq = ++this.seq
    try {
      const response = await this.client.whatIf({ ...this.baseline, mutations })
      if (mySeq !== this.seq) return // stale response: a newer request exists
      this.baseline = this.currentBody()
      this.state.report = response.mutated
      this.state.delta = response.delta
      this.state.stale = this.pending.length > 0
      this.state.error = null
    } catch (err) {
      if (mySeq !== this.seq) return
      this.state.stale = false
      this.state.error = err instanceof ServiceError ? err.message : String(err)
    }
    this.notify()
  }

  // -- component toggling ---------------------------------------------------

  /** Include/exclude a component and re-analyze, keeping both reports. */
  async toggleComponent(ref: number): Promise<void> {
    const slot = this.slot(ref)
    slot.enabled = !slot.enabled
    const before = this.state.report
    await this.reanalyze()
    if (before && this.state.report) {
      this.state.comparison = {
        before,
        after: this.state.report,
        label: `${slot.kind} slot ${slot.id} ${slot.enabled ? 'enabled' : 'disabled'}`,
      }
      this.notify()
    }
  }

  private currentBody(): AnalyzeBody {
    if (!this.state.project) throw new Error('no project card loaded')
    return {
      project: structuredClone(this.state.project),
      data: this.state.slots
        .filter((s) => s.kind === 'data' && s.enabled && s.card)
        .map((s) => structuredClone(s.card!)),
      models: this.state.slots
        .filter((s) => s.kind === 'model' && s.enabled && s.card)
        .map((s) => structuredClone(s.card!)),
    }
  }

  /** Full /v1/analyze of the currently enabled slots and drafts. */
  async reanalyze(): Promise<void> {
    if (!this.state.project) {
      this.notify()
      return
    }
    this.pending = []
    this.state.pendingEdits = 0
    this.state.stale = true
    this.notify()
    const body = this.currentBody()
    const mySeq = ++this.seq
    try {
      const report = await this.client.analyze(body)
      if (mySeq !== this.seq) return
      this.baseline = body
      this.state.report = report
      this.state.delta = []
      this.state.stale = false
      this.state.error = null
    } catch (err) {
      if (mySeq !== this.seq) return
      this.state.stale = false
      this.state.report = null
      this.state.error = err instanceof ServiceError ? err.message : String(err)
    }
    this.notify()
  }

  // -- export ---------------------------------------------------------------

  exportCards(): { filename: string; text: string }[] {
    const out: { filename: string; text: string }[] = []
    if (this.state.project) {
      out.push({
        filename: `${this.state.project.card_id}.card.yaml`,
        text: toCanonicalYaml(this.state.project),
      })
    }
    for (const slot of this.state.slots) {
      if (slot.card) {
        out.push({
          filename: `${slot.card.card_id}.card.yaml`,
          text: toCanonicalYaml(slot.card),
        })
      }
    }
    return out
  }

  exportReport(): string | null {
    return this.state.report ? JSON.stringify(this.state.report, null, 2) + '\n' : null
  }
}
