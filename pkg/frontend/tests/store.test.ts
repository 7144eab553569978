// Store behavior against a scripted fake service: debounce batching,
// stale-response dropping, client-side domain rejection, component toggling.

import { beforeEach, describe, expect, it } from 'vitest'

import type { ServiceClient } from '../src/api'
import { WorkspaceStore } from '../src/store'
import type {
  AnalyzeBody,
  Card,
  CardKind,
  Mutation,
  Report,
  SchemaResponse,
  Verdict,
  WhatIfResponse,
} from '../src/types'

const SCHEMAS: Record<CardKind, SchemaResponse> = {
  project: {
    kind: 'project',
    registry_version: 'fake',
    attributes: [
      {
        id: 'record_keeping.logging_enabled',
        category: 'Record-keeping',
        domain: { type: 'flag' },
        dispositive: false,
        articles: ['Art. 12'],
        kinds: ['project'],
      },
      {
        id: 'technical_documentation.annex_coverage_grade',
        category: 'Technical documentation',
        domain: { type: 'level', min: 0, max: 4 },
        dispositive: false,
        articles: ['Art. 11'],
        kinds: ['project'],
      },
    ],
  },
  data: {
    kind: 'data',
    registry_version: 'fake',
    attributes: [
      {
        id: 'data_governance.bias_examined',
        category: 'Data governance',
        domain: { type: 'flag' },
        dispositive: false,
        articles: ['Art. 10'],
        kinds: ['data'],
      },
    ],
  },
  model: {
    kind: 'model',
    registry_version: 'fake',
    attributes: [],
  },
}

function fakeReport(verdict: Verdict): Report {
  return {
    report_schema_version: '1',
    ruleset_version: 'fake',
    registry_version: 'fake',
    strict: false,
    classification: ['in_scope'],
    assumptions: [],
    results: [],
    verdict,
    elapsed_ms: 0,
    disclaimer: '',
  }
}

interface Deferred<T> {
  promise: Promise<T>
  resolve: (v: T) => void
}

function deferred<T>(): Deferred<T> {
  let resolve!: (v: T) => void
  const promise = new Promise<T>((r) => (resolve = r))
  return { promise, resolve }
}

class FakeService implements ServiceClient {
  analyzeCalls: AnalyzeBody[] = []
  whatIfCalls: Mutation[][] = []
  analyzeVerdict: Verdict = 'non_compliant'
  pendingWhatIf: Deferred<WhatIfResponse>[] = []
  autoResolveWhatIf = true

  async health() {
    return true
  }

  async validateCard() {
    return { valid: true, issues: [] }
  }

  async analyze(body: AnalyzeBody): Promise<Report> {
    this.analyzeCalls.push(structuredClone(body))
    return fakeReport(this.analyzeVerdict)
  }

  async whatIf(body: AnalyzeBody & { mutations: Mutation[] }): Promise<WhatIfResponse> {
    this.whatIfCalls.push(structuredClone(body.mutations))
    if (this.autoResolveWhatIf) {
      return {
        baseline: fakeReport('non_compliant'),
        mutated: fakeReport('compliant'),
        delta: ['R-ART12-RECORD-KEEPING'],
      }
    }
    const gate = deferred<WhatIfResponse>()
    this.pendingWhatIf.push(gate)
    return gate.promise
  }

  async schema(kind: CardKind) {
    return SCHEMAS[kind]
  }

  async rules() {
    return { rules_version: 'fake', requirements: [] }
  }
}

function projectCard(): Card {
  return {
    kind: 'project',
    card_id: 'proj1',
    schema_version: '1.0.0',
    values: { 'record_keeping.logging_enabled': false },
  }
}

function dataCard(id = 'd1'): Card {
  return {
    kind: 'data',
    card_id: id,
    schema_version: '1.0.0',
    values: { 'data_governance.bias_examined': true },
  }
}

type Scheduled = { fn: () => void; ms: number; cancelled: boolean }

function manualScheduler() {
  const queue: Scheduled[] = []
  return {
    queue,
    schedule: (fn: () => void, ms: number) => {
      const entry: Scheduled = { fn, ms, cancelled: false }
      queue.push(entry)
      return entry
    },
    cancel: (handle: unknown) => {
      ;(handle as Scheduled).cancelled = true
    },
    fire: () => {
      const pending = queue.filter((e) => !e.cancelled)
      queue.length = 0
      for (const entry of pending) entry.fn()
    },
  }
}

async function flushMicrotasks() {
  await new Promise((r) => setTimeout(r, 0))
}

describe('WorkspaceStore', () => {
  let service: FakeService
  let scheduler: ReturnType<typeof manualScheduler>
  let store: WorkspaceStore

  beforeEach(async () => {
    service = new FakeService()
    scheduler = manualScheduler()
    store = new WorkspaceStore(service, {
      schedule: scheduler.schedule,
      cancel: scheduler.cancel,
    })
    await store.connect()
  })

  it('loading the project card triggers a full analysis', async () => {
    await store.loadCard(projectCard(), 'project')
    expect(service.analyzeCalls).toHaveLength(1)
    expect(store.state.report?.verdict).toBe('non_compliant')
    expect(store.state.stale).toBe(false)
  })

  it('rejects a card of the wrong kind for the slot', async () => {
    const slot = store.addSlot('model')
    const issues = await store.loadCard(dataCard(), slot.id)
    expect(issues[0].code).toBe('WRONG_KIND')
    expect(store.slot(slot.id).card).toBeNull()
    expect(service.analyzeCalls).toHaveLength(0)
  })

  it('debounce-batches several edits into one what-if call', async () => {
    await store.loadCard(projectCard(), 'project')
    store.editAttribute('project', 'record_keeping.logging_enabled', true)
    store.editAttribute('project', 'technical_documentation.annex_coverage_grade', 4)
    expect(store.state.pendingEdits).toBe(2)
    expect(service.whatIfCalls).toHaveLength(0)
    scheduler.fire()
    await flushMicrotasks()
    expect(service.whatIfCalls).toHaveLength(1)
    expect(service.whatIfCalls[0]).toHaveLength(2)
    expect(store.state.report?.verdict).toBe('compliant')
    expect(store.state.delta).toEqual(['R-ART12-RECORD-KEEPING'])
  })

  it('re-editing the same attribute keeps only the latest value', async () => {
    await store.loadCard(projectCard(), 'project')
    store.editAttribute('project', 'record_keeping.logging_enabled', true)
    store.editAttribute('project', 'record_keeping.logging_enabled', false)
    scheduler.fire()
    await flushMicrotasks()
    expect(service.whatIfCalls[0]).toEqual([
      { card_id: 'proj1', attribute_id: 'record_keeping.logging_enabled', value: false },
    ])
  })

  it('rejects domain-violating values before any request', async () => {
    await store.loadCard(projectCard(), 'project')
    const callsBefore = service.whatIfCalls.length
    expect(
      store.editAttribute('project', 'technical_documentation.annex_coverage_grade', 9),
    ).toBe(false)
    expect(store.editAttribute('project', 'record_keeping.logging_enabled', 3)).toBe(false)
    expect(store.editAttribute('project', 'unknown.attribute', true)).toBe(false)
    scheduler.fire()
    await flushMicrotasks()
    expect(service.whatIfCalls.length).toBe(callsBefore)
    expect(store.state.error).toContain('invalid value')
  })

  it('drops stale responses: the latest request wins', async () => {
    await store.loadCard(projectCard(), 'project')
    service.autoResolveWhatIf = false

    store.editAttribute('project', 'record_keeping.logging_enabled', true)
    scheduler.fire() // first request goes out, unresolved
    await flushMicrotasks()
    store.editAttribute('project', 'technical_documentation.annex_coverage_grade', 2)
    scheduler.fire() // second request goes out
    await flushMicrotasks()
    expect(service.pendingWhatIf).toHaveLength(2)

    // Resolve out of order: the late-arriving FIRST response must lose.
    service.pendingWhatIf[1].resolve({
      baseline: fakeReport('non_compliant'),
      mutated: fakeReport('indeterminate'),
      delta: ['R-LATEST'],
    })
    await flushMicrotasks()
    service.pendingWhatIf[0].resolve({
      baseline: fakeReport('non_compliant'),
      mutated: fakeReport('compliant'),
      delta: ['R-STALE'],
    })
    await flushMicrotasks()

    expect(store.state.report?.verdict).toBe('indeterminate')
    expect(store.state.delta).toEqual(['R-LATEST'])
  })

  it('marks the report stale while a request is in flight', async () => {
    await store.loadCard(projectCard(), 'project')
    service.autoResolveWhatIf = false
    store.editAttribute('project', 'record_keeping.logging_enabled', true)
    expect(store.state.stale).toBe(true)
    scheduler.fire()
    await flushMicrotasks()
    expect(store.state.stale).toBe(true)
    service.pendingWhatIf[0].resolve({
      baseline: fakeReport('non_compliant'),
      mutated: fakeReport('compliant'),
      delta: [],
    })
    await flushMicrotasks()
    expect(store.state.stale).toBe(false)
  })

  it('toggling a component re-analyzes without it and keeps the comparison', async () => {
    await store.loadCard(projectCard(), 'project')
    const slot = store.addSlot('data')
    await store.loadCard(dataCard(), slot.id)
    expect(service.analyzeCalls.at(-1)?.data).toHaveLength(1)

    service.analyzeVerdict = 'compliant'
    await store.toggleComponent(slot.id)
    expect(service.analyzeCalls.at(-1)?.data).toHaveLength(0)
    expect(store.state.report?.verdict).toBe('compliant')
    expect(store.state.comparison?.before.verdict).toBe('non_compliant')
    expect(store.state.comparison?.after.verdict).toBe('compliant')

    service.analyzeVerdict = 'non_compliant'
    await store.toggleComponent(slot.id)
    expect(service.analyzeCalls.at(-1)?.data).toHaveLength(1)
    expect(store.state.report?.verdict).toBe('non_compliant')
  })

  it('edits on a disabled slot stay local until re-enabled', async () => {
    await store.loadCard(projectCard(), 'project')
    const slot = store.addSlot('data')
    await store.loadCard(dataCard(), slot.id)
    await store.toggleComponent(slot.id) // disable
    const whatIfBefore = service.whatIfCalls.length
    store.editAttribute(slot.id, 'data_governance.bias_examined', false)
    scheduler.fire()
    await flushMicrotasks()
    expect(service.whatIfCalls.length).toBe(whatIfBefore)
    service.analyzeVerdict = 'non_compliant'
    await store.toggleComponent(slot.id) // re-enable: draft edit now in the body
    const sent = service.analyzeCalls.at(-1)!
    expect(sent.data[0].values['data_governance.bias_examined']).toBe(false)
  })

  it('exports canonical cards and the report', async () => {
    await store.loadCard(projectCard(), 'project')
    const files = store.exportCards()
    expect(files).toHaveLength(1)
    expect(files[0].filename).toBe('proj1.card.yaml')
    expect(files[0].text).toContain('kind: project')
    expect(store.exportReport()).toContain('"verdict"')
  })
})
