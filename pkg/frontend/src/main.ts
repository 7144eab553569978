// DOM wiring for the explorer. All state logic lives in store.ts; this file
// only renders and forwards events.

import { ApiClient } from './api'
import { parseCardText, CardParseError } from './cards'
import { buildFormFields, type FormField } from './forms'
import { WorkspaceStore, type SlotRef } from './store'
import type { AttributeValue, Card, Verdict } from './types'

const SERVICE_URL =
  new URLSearchParams(location.search).get('service') ?? 'http://127.0.0.1:8787'

const client = new ApiClient(SERVICE_URL)
const store = new WorkspaceStore(client)

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T

const VERDICT_LABEL: Record<Verdict, string> = {
  compliant: 'COMPLIANT',
  non_compliant: 'NON-COMPLIANT',
  indeterminate: 'INDETERMINATE',
  prohibited: 'PROHIBITED',
  out_of_scope: 'OUT OF SCOPE',
}

function el(tag: string, className = '', text = ''): HTMLElement {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text) node.textContent = text
  return node
}

function renderBanner(): void {
  const banner = $('verdict-banner')
  const report = store.state.report
  banner.classList.toggle('stale', store.state.stale)
  if (!report) {
    banner.textContent = store.state.error ?? 'load a project card to begin'
    banner.dataset.verdict = ''
    return
  }
  banner.textContent = VERDICT_LABEL[report.verdict]
  banner.dataset.verdict = report.verdict
}

function renderConnection(): void {
  const label = $('connection')
  label.textContent = `service: ${store.state.connection} (${SERVICE_URL})`
  label.className = `connection ${store.state.connection}`
}

function fieldInput(field: FormField, card: Card, ref: SlotRef): HTMLElement {
  const current = card.values[field.id] ?? null
  const wrap = el('label', 'field')
  wrap.append(el('span', 'field-name', field.label))
  const commit = (value: AttributeValue) => {
    if (!store.editAttribute(ref, field.id, value)) render()
  }
  if (field.control === 'checkbox') {
    const select = document.createElement('select')
    for (const option of ['unanswered', 'true', 'false']) {
      select.append(new Option(option, option))
    }
    select.value = current === null ? 'unanswered' : String(current)
    select.onchange = () =>
      commit(select.value === 'unanswered' ? null : select.value === 'true')
    wrap.append(select)
  } else if (field.control === 'grade') {
    const select = document.createElement('select')
    select.append(new Option('unanswered', 'unanswered'))
    for (let i = field.min ?? 0; i <= (field.max ?? 4); i++) {
      select.append(new Option(String(i), String(i)))
    }
    select.value = current === null ? 'unanswered' : String(current)
    select.onchange = () =>
      commit(select.value === 'unanswered' ? null : Number(select.value))
    wrap.append(select)
  } else if (field.control === 'select') {
    const select = document.createElement('select')
    select.append(new Option('unanswered', 'unanswered'))
    for (const token of field.options) select.append(new Option(token, token))
    select.value = typeof current === 'string' ? current : 'unanswered'
    select.onchange = () => commit(select.value === 'unanswered' ? null : select.value)
    wrap.append(select)
  } else {
    const select = document.createElement('select')
    select.multiple = true
    select.size = Math.min(5, field.options.length)
    for (const token of field.options) {
      const option = new Option(token, token)
      option.selected = Array.isArray(current) && current.includes(token)
      select.append(option)
    }
    select.onchange = () =>
      commit(Array.from(select.selectedOptions).map((o) => o.value))
    wrap.append(select)
  }
  wrap.title = `${field.category} [${field.articles.join(', ')}]`
  return wrap
}

function renderForm(container: HTMLElement, card: Card | null, ref: SlotRef): void {
  container.textContent = ''
  if (!card) return
  const schema = store.schemaFor(card.kind)
  if (!schema) return
  const fields = buildFormFields(schema)
  let currentCategory = ''
  for (const field of fields) {
    if (field.category !== currentCategory) {
      currentCategory = field.category
      container.append(el('h4', 'category', currentCategory))
    }
    container.append(fieldInput(field, card, ref))
  }
}

function loadControls(ref: SlotRef, target: HTMLElement): void {
  const file = document.createElement('input')
  file.type = 'file'
  file.onchange = async () => {
    const chosen = file.files?.[0]
    if (chosen) await loadText(await chosen.text(), ref)
  }
  const paste = el('button', '', 'paste') as HTMLButtonElement
  paste.onclick = async () => {
    const text = prompt('paste a card document (YAML, JSON, or front-matter Markdown)')
    if (text) await loadText(text, ref)
  }
  target.append(file, paste)
}

async function loadText(text: string, ref: SlotRef): Promise<void> {
  try {
    const card = parseCardText(text)
    await store.loadCard(card, ref)
  } catch (err) {
    if (err instanceof CardParseError) {
      alert(err.message)
    } else {
      throw err
    }
  }
  render()
}

function renderIssues(target: HTMLElement, issues: { severity: string; path: string; message: string; code: string }[]): void {
  target.textContent = ''
  for (const issue of issues) {
    target.append(
      el('div', `issue ${issue.severity}`, `${issue.path}: ${issue.code} ${issue.message}`),
    )
  }
}

function renderSlots(): void {
  const list = $('slots')
  list.textContent = ''
  for (const slot of store.state.slots) {
    const box = el('div', 'slot')
    const head = el('div', 'slot-head')
    head.append(el('strong', '', `${slot.kind} slot ${slot.id}`))
    const toggle = el('button', '', slot.enabled ? 'disable' : 'enable') as HTMLButtonElement
    toggle.disabled = !slot.card
    toggle.onclick = () => void store.toggleComponent(slot.id)
    head.append(toggle)
    box.append(head)
    if (slot.card) {
      head.append(el('code', '', slot.card.card_id))
      const form = el('div', 'form')
      renderForm(form, slot.enabled ? slot.card : null, slot.id)
      box.append(form)
    } else {
      const controls = el('div', 'load-controls')
      loadControls(slot.id, controls)
      box.append(controls)
    }
    const issues = el('div', 'issues')
    renderIssues(issues, slot.issues)
    box.append(issues)
    list.append(box)
  }
}

function renderReport(): void {
  const table = $('requirements')
  table.textContent = ''
  const report = store.state.report
  if (!report) return
  for (const result of report.results) {
    const row = el('div', `req ${result.status}`)
    row.append(el('span', 'req-id', result.requirement_id))
    row.append(el('span', 'req-status', result.status))
    if (store.state.delta.includes(result.requirement_id)) {
      row.append(el('span', 'req-changed', 'changed'))
    }
    if (result.evidence.length) {
      row.title = result.evidence
        .map((e) => `${e.card_id}:${e.attribute_id} = ${JSON.stringify(e.observed)} (${e.state})`)
        .join('\n')
    }
    table.append(row)
  }
  $('classification').textContent = report.classification.join(', ')
  const deltaBox = $('delta')
  deltaBox.textContent = store.state.delta.length
    ? `changed: ${store.state.delta.join(', ')}`
    : ''
  const comparison = store.state.comparison
  $('comparison').textContent = comparison
    ? `${comparison.label}: ${VERDICT_LABEL[comparison.before.verdict]} -> ` +
      `${VERDICT_LABEL[comparison.after.verdict]}`
    : ''
}

function render(): void {
  renderConnection()
  renderBanner()
  renderForm($('project-form'), store.state.project, 'project')
  renderIssues($('project-issues'), store.state.projectIssues)
  renderSlots()
  renderReport()
  const error = $('error')
  error.textContent = store.state.error ?? ''
}

function wireStatic(): void {
  loadControls('project', $('project-load'))
  $('add-data').onclick = () => {
    store.addSlot('data')
    render()
  }
  $('add-model').onclick = () => {
    store.addSlot('model')
    render()
  }
  $('export-cards').onclick = () => {
    for (const file of store.exportCards()) {
      download(file.filename, file.text)
    }
  }
  $('export-report').onclick = () => {
    const text = store.exportReport()
    if (text) download('compliance-report.json', text)
  }
}

function download(filename: string, text: string): void {
  const blob = new Blob([text], { type: 'text/plain' })
  const link = document.createElement('a')
  link.href = URL.createObjectURL(blob)
  link.download = filename
  link.click()
  URL.revokeObjectURL(link.href)
}

store.onChange(render)
wireStatic()
void store.connect().then(render)
